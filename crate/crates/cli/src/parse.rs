use std::f64::consts::PI;
use std::str::FromStr;

use statmean_core::Complex64;

/// Angle in radians; accepts plain numbers and multiples of pi such as
/// `pi`, `-0.5pi`, `2pi/3`, `pi/4`.
pub fn parse_angle(text: &str) -> Result<f64, String> {
    let t = text.trim();
    let bad = || format!("invalid angle `{text}`");
    let (head, den) = match t.split_once('/') {
        Some((h, d)) => (h.trim(), Some(d.trim().parse::<f64>().map_err(|_| bad())?)),
        None => (t, None),
    };
    let value = match head.strip_suffix("pi").or_else(|| head.strip_suffix('π')) {
        Some(coef) => {
            let coef = coef.trim().trim_end_matches('*');
            let c = match coef {
                "" | "+" => 1.0,
                "-" => -1.0,
                c => c.parse::<f64>().map_err(|_| bad())?,
            };
            c * PI
        }
        None => head.parse::<f64>().map_err(|_| bad())?,
    };
    let value = match den {
        Some(d) if d != 0.0 => value / d,
        Some(_) => return Err(bad()),
        None => value,
    };
    if value.is_finite() {
        Ok(value)
    } else {
        Err(bad())
    }
}

/// `a:b,c:d` into closed arcs.
pub fn parse_arcs(text: &str) -> Result<Vec<(f64, f64)>, String> {
    text.split(',')
        .map(|part| {
            let (a, b) = part
                .split_once(':')
                .ok_or_else(|| format!("arc `{part}` must look like `start:end`"))?;
            Ok((parse_angle(a)?, parse_angle(b)?))
        })
        .collect()
}

/// `start:stop:step` (inclusive), `start:stop`, or `n1,n2,...`; strictly
/// increasing positive orders.
pub fn parse_grid(text: &str) -> Result<Vec<usize>, String> {
    let t = text.trim();
    let num = |s: &str| {
        s.trim()
            .parse::<usize>()
            .map_err(|_| format!("invalid order `{s}` in grid `{text}`"))
    };
    let grid: Vec<usize> = if t.contains(':') {
        let parts: Vec<&str> = t.split(':').collect();
        let (start, stop, step) = match parts.as_slice() {
            [a, b] => (num(a)?, num(b)?, 1),
            [a, b, c] => (num(a)?, num(b)?, num(c)?),
            _ => return Err(format!("grid `{text}` must be start:stop[:step]")),
        };
        if step == 0 {
            return Err("grid step must be positive".into());
        }
        (start..=stop).step_by(step).collect()
    } else {
        t.split(',').map(num).collect::<Result<_, _>>()?
    };
    if grid.is_empty() {
        return Err(format!("grid `{text}` is empty"));
    }
    if grid[0] == 0 {
        return Err("grid orders must be positive".into());
    }
    if grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(format!("grid `{text}` must be strictly increasing"));
    }
    Ok(grid)
}

/// `x`, `x+yi`, `yi`, or polar `r@angle`.
pub fn parse_complex(text: &str) -> Result<Complex64, String> {
    let t = text.trim();
    if let Some((r, a)) = t.split_once('@') {
        let r: f64 = r.trim().parse().map_err(|_| format!("invalid modulus in `{text}`"))?;
        return Ok(Complex64::from_polar(r, parse_angle(a)?));
    }
    let z = Complex64::from_str(t).map_err(|_| format!("invalid complex number `{text}`"))?;
    if z.re.is_finite() && z.im.is_finite() {
        Ok(z)
    } else {
        Err(format!("invalid complex number `{text}`"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn angles() {
        assert_eq!(parse_angle("pi").unwrap(), PI);
        assert_eq!(parse_angle("-pi").unwrap(), -PI);
        assert_eq!(parse_angle("0.5pi").unwrap(), 0.5 * PI);
        assert_eq!(parse_angle("2pi/3").unwrap(), 2.0 * PI / 3.0);
        assert_eq!(parse_angle("pi/2").unwrap(), PI / 2.0);
        assert_eq!(parse_angle("1.25").unwrap(), 1.25);
        assert!(parse_angle("pie").is_err());
        assert!(parse_angle("pi/0").is_err());
    }

    #[test]
    fn arcs() {
        let a = parse_arcs("0.5pi:pi,-pi:-0.5pi").unwrap();
        assert_eq!(a, vec![(0.5 * PI, PI), (-PI, -0.5 * PI)]);
        assert!(parse_arcs("0.5pi-pi").is_err());
    }

    #[test]
    fn grids() {
        assert_eq!(parse_grid("8:20:4").unwrap(), vec![8, 12, 16, 20]);
        assert_eq!(parse_grid("3:5").unwrap(), vec![3, 4, 5]);
        assert_eq!(parse_grid("64,128,256").unwrap(), vec![64, 128, 256]);
        assert!(parse_grid("8,4").is_err());
        assert!(parse_grid("0:4").is_err());
        assert!(parse_grid("1:4:0").is_err());
    }

    #[test]
    fn complex_points() {
        assert_eq!(parse_complex("1").unwrap(), Complex64::new(1.0, 0.0));
        assert_eq!(parse_complex("0.3-0.4i").unwrap(), Complex64::new(0.3, -0.4));
        let z = parse_complex("1@0.5pi").unwrap();
        assert!((z - Complex64::new(0.0, 1.0)).norm() < 1e-15);
        assert!(parse_complex("x").is_err());
    }
}
