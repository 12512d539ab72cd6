//! Flag value parsers.

/// A parsed comma list. Wrapped so clap treats it as one value.
#[derive(Debug, Clone, PartialEq)]
pub struct List<T>(pub Vec<T>);

impl<T> std::ops::Deref for List<T> {
    type Target = Vec<T>;

    fn deref(&self) -> &Vec<T> {
        &self.0
    }
}

pub fn usizes(text: &str) -> Result<List<usize>, String> {
    usize_list(text).map(List)
}

pub fn floats(text: &str) -> Result<List<f64>, String> {
    f64_list(text).map(List)
}

/// Comma-separated integers, where an item may also be an inclusive range
/// `a..b`: `"1,2,5"`, `"1..8"`, `"1..4,10,100"`.
pub fn usize_list(text: &str) -> Result<Vec<usize>, String> {
    let mut out = Vec::new();
    for item in text.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        if let Some((a, b)) = item.split_once("..") {
            let a: usize = a.trim().parse().map_err(|e| format!("{item:?}: {e}"))?;
            let b: usize = b.trim().parse().map_err(|e| format!("{item:?}: {e}"))?;
            if a > b {
                return Err(format!("empty range {item:?}"));
            }
            out.extend(a..=b);
        } else {
            out.push(item.parse().map_err(|e| format!("{item:?}: {e}"))?);
        }
    }
    if out.is_empty() {
        return Err("empty list".into());
    }
    Ok(out)
}

pub fn f64_list(text: &str) -> Result<Vec<f64>, String> {
    let out = text
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| s.parse::<f64>().map_err(|e| format!("{s:?}: {e}")))
        .collect::<Result<Vec<_>, _>>()?;
    if out.is_empty() {
        return Err("empty list".into());
    }
    Ok(out)
}

/// `i,j`.
pub fn pair(text: &str) -> Result<(usize, usize), String> {
    match usize_list(text)?.as_slice() {
        [i, j] => Ok((*i, *j)),
        _ => Err(format!("expected two indices `i,j`, got {text:?}")),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lists() {
        assert_eq!(usize_list("1..4,10").unwrap(), vec![1, 2, 3, 4, 10]);
        assert_eq!(usize_list(" 3 ").unwrap(), vec![3]);
        assert!(usize_list("4..1").is_err());
        assert!(usize_list("").is_err());
        assert_eq!(f64_list("0.6, 0.5").unwrap(), vec![0.6, 0.5]);
        assert!(f64_list("a").is_err());
        assert_eq!(pair("0,2").unwrap(), (0, 2));
        assert!(pair("1").is_err());
    }
}
