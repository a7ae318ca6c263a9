use std::collections::HashMap;

pub const DEFAULT_MAX_REDIRECT_DEPTH: usize = 10;

/// Outcome of following a title through the redirect table.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Resolution<'a> {
    /// A non-redirect article title.
    Canonical(&'a str),
    /// The chain revisits a title or is longer than the depth bound.
    Cyclic,
    /// The chain ends at a title that is not an article.
    Dangling,
}

/// Redirect page title to target title, for one wiki.
#[derive(Clone, Debug, Default)]
pub struct RedirectMap {
    targets: HashMap<String, String>,
}

impl RedirectMap {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, source: impl Into<String>, target: impl Into<String>) {
        self.targets.insert(source.into(), target.into());
    }

    pub fn target(&self, source: &str) -> Option<&str> {
        self.targets.get(source).map(String::as_str)
    }

    pub fn len(&self) -> usize {
        self.targets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.targets.is_empty()
    }

    /// Follows redirects from `title` until a title without a redirect entry
    /// is reached. That title is canonical only if `is_article` accepts it.
    ///
    /// At most `max_depth` hops are taken; a chain needing more, or one that
    /// revisits a title, is [`Resolution::Cyclic`].
    pub fn resolve<'a, F>(
        &'a self,
        title: &'a str,
        is_article: F,
        max_depth: usize,
    ) -> Resolution<'a>
    where
        F: Fn(&str) -> bool,
    {
        let mut current = title;
        let mut visited: Vec<&str> = Vec::new();
        loop {
            let Some(next) = self.target(current) else {
                return if is_article(current) {
                    Resolution::Canonical(current)
                } else {
                    Resolution::Dangling
                };
            };
            if visited.len() == max_depth || visited.contains(&current) {
                return Resolution::Cyclic;
            }
            visited.push(current);
            current = next;
        }
    }
}
