//! Parsing of `a:b:step` ranges and comma lists.

use crate::error::CliError;

/// Inclusive float range `a:b:step` or comma list.
pub fn floats(s: &str) -> Result<Vec<f64>, CliError> {
    let s = s.trim();
    let out = if s.contains(':') {
        let parts: Vec<f64> = s.split(':').map(parse_f64).collect::<Result<_, _>>()?;
        let [a, b, step] = parts[..] else {
            return Err(CliError::usage(format!("range {s:?} must look like start:stop:step")));
        };
        if step.is_nan() || step <= 0.0 {
            return Err(CliError::usage(format!("range {s:?} needs a positive step")));
        }
        let mut v = Vec::new();
        let mut k = 0usize;
        loop {
            // Snap to 12 decimals so 0.2 + 9 * 0.05 prints as 0.65.
            let x = ((a + step * k as f64) * 1e12).round() / 1e12;
            if x > b + 1e-9 * step {
                break;
            }
            v.push(x);
            k += 1;
        }
        v
    } else {
        s.split(',').filter(|t| !t.trim().is_empty()).map(parse_f64).collect::<Result<_, _>>()?
    };
    if out.is_empty() {
        return Err(CliError::usage(format!("range {s:?} is empty")));
    }
    Ok(out)
}

/// Inclusive integer range `a:b[:step]` or comma list.
pub fn ints(s: &str) -> Result<Vec<usize>, CliError> {
    let s = s.trim();
    let out: Vec<usize> = if s.contains(':') {
        let parts: Vec<usize> = s.split(':').map(parse_usize).collect::<Result<_, _>>()?;
        let (a, b, step) = match parts[..] {
            [a, b] => (a, b, 1),
            [a, b, step] => (a, b, step),
            _ => return Err(CliError::usage(format!("range {s:?} must look like start:stop[:step]"))),
        };
        if step == 0 {
            return Err(CliError::usage(format!("range {s:?} needs a positive step")));
        }
        if a > b {
            Vec::new()
        } else {
            (a..=b).step_by(step).collect()
        }
    } else {
        s.split(',').filter(|t| !t.trim().is_empty()).map(parse_usize).collect::<Result<_, _>>()?
    };
    if out.is_empty() {
        return Err(CliError::usage(format!("range {s:?} is empty")));
    }
    Ok(out)
}

/// Comma list of arbitrary parseable items.
pub fn list<T: std::str::FromStr>(s: &str) -> Result<Vec<T>, CliError>
where
    T::Err: std::fmt::Display,
{
    let out: Vec<T> = s
        .split(',')
        .map(str::trim)
        .filter(|t| !t.is_empty())
        .map(|t| t.parse::<T>().map_err(|e| CliError::usage(format!("{t:?}: {e}"))))
        .collect::<Result<_, _>>()?;
    if out.is_empty() {
        return Err(CliError::usage(format!("list {s:?} is empty")));
    }
    Ok(out)
}

fn parse_f64(t: &str) -> Result<f64, CliError> {
    t.trim().parse::<f64>().map_err(|_| CliError::usage(format!("not a number: {t:?}")))
}

fn parse_usize(t: &str) -> Result<usize, CliError> {
    t.trim().parse::<usize>().map_err(|_| CliError::usage(format!("not a non-negative integer: {t:?}")))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn float_range_is_inclusive() {
        let v = floats("0.2:2.0:0.05").unwrap();
        assert_eq!(v.len(), 37);
        assert!((v[36] - 2.0).abs() < 1e-12);
    }

    #[test]
    fn lists_and_ranges() {
        assert_eq!(ints("14,18,22").unwrap(), vec![14, 18, 22]);
        assert_eq!(ints("4:10:2").unwrap(), vec![4, 6, 8, 10]);
        assert_eq!(ints("1:3").unwrap(), vec![1, 2, 3]);
        assert_eq!(floats("1,2.5").unwrap(), vec![1.0, 2.5]);
    }

    #[test]
    fn empty_ranges_are_rejected() {
        assert!(ints("10:4").is_err());
        assert!(ints("").is_err());
        assert!(floats("2:1:0.1").is_err());
        assert!(floats("0:1:0").is_err());
    }
}
