use std::io::BufRead;

use crate::Result;

/// Calls `f` with the 1-based line number and the tab-separated fields of
/// every line. Trailing `\n` is stripped; an empty trailing line is ignored.
pub(crate) fn for_each_row<R, F>(mut reader: R, mut f: F) -> Result<()>
where
    R: BufRead,
    F: FnMut(u64, &[&str]) -> Result<()>,
{
    let mut line = String::new();
    let mut number = 0;
    loop {
        line.clear();
        if reader.read_line(&mut line)? == 0 {
            return Ok(());
        }
        number += 1;
        let row = line.strip_suffix('\n').unwrap_or(&line);
        if row.is_empty() {
            continue;
        }
        let fields: Vec<&str> = row.split('\t').collect();
        f(number, &fields)?;
    }
}
