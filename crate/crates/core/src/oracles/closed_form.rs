//! Closed-form cover-time references for the two solvable families.
//!
//! A path walked from an endpoint has cover time (n-1)^2 and
//! cover-and-return 2(n-1)^2. A star walked from the center is a coupon
//! collector over the leaves with a two-step round trip per draw:
//! cover-and-return 2(n-1) H_{n-1}, cover one less (the last step in is
//! not walked back before coverage is complete).

use crate::error::{Error, Result};
use crate::numeric::{rat_u, Rat};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Family {
    Path,
    Star,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StartRole {
    Endpoint,
    Center,
}

fn harmonic(k: usize) -> Rat {
    let mut h = Rat::default();
    for i in 1..=k as u64 {
        h += &(&rat_u(1) / rat_u(i));
    }
    h
}

/// Exact expected cover-and-return time for a supported (family, start)
/// pair on n unit vertices.
pub fn closed_form_cover_return(family: Family, n: usize, role: StartRole) -> Result<Rat> {
    if n < 2 {
        return Err(Error::input("closed forms start at two vertices"));
    }
    let m = rat_u((n - 1) as u64);
    match (family, role) {
        (Family::Path, StartRole::Endpoint) => Ok(&(&m * &m) * &rat_u(2)),
        (Family::Star, StartRole::Center) => Ok(&(&m * &rat_u(2)) * &harmonic(n - 1)),
        _ => Err(Error::input("no closed form for that family and start")),
    }
}

/// Exact expected cover time (no return leg) for a supported pair.
pub fn closed_form_cover(family: Family, n: usize, role: StartRole) -> Result<Rat> {
    let full = closed_form_cover_return(family, n, role)?;
    Ok(match (family, role) {
        (Family::Path, StartRole::Endpoint) => &full / rat_u(2),
        (Family::Star, StartRole::Center) => &full - &rat_u(1),
        _ => unreachable!("unsupported pairs error above"),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::rat_i64;
    use crate::oracles::exact::oracle_exact;
    use crate::tree::WeightedTree;

    #[test]
    fn pinned_values() {
        let cr = |f, n, r| closed_form_cover_return(f, n, r).unwrap();
        let c = |f, n, r| closed_form_cover(f, n, r).unwrap();
        assert_eq!(cr(Family::Path, 2, StartRole::Endpoint), rat_i64(2, 1));
        assert_eq!(cr(Family::Path, 3, StartRole::Endpoint), rat_i64(8, 1));
        assert_eq!(cr(Family::Star, 4, StartRole::Center), rat_i64(11, 1));
        assert_eq!(c(Family::Path, 3, StartRole::Endpoint), rat_i64(4, 1));
        assert_eq!(c(Family::Star, 4, StartRole::Center), rat_i64(10, 1));
        assert!(closed_form_cover_return(Family::Path, 1, StartRole::Endpoint).is_err());
        assert!(closed_form_cover_return(Family::Star, 5, StartRole::Endpoint).is_err());
    }

    #[test]
    fn agrees_exactly_with_the_state_space_oracle() {
        for n in 2..=8usize {
            let mut path = String::new();
            for i in 1..n {
                path.push_str(&format!("v{} v{}\n", i - 1, i));
            }
            let t = WeightedTree::parse(&path).unwrap();
            let ex = oracle_exact(&t, 0).unwrap();
            assert_eq!(
                ex.cover_return,
                closed_form_cover_return(Family::Path, n, StartRole::Endpoint).unwrap(),
                "path n={n}"
            );
            assert_eq!(
                ex.cover,
                closed_form_cover(Family::Path, n, StartRole::Endpoint).unwrap(),
                "path n={n} cover"
            );

            let mut star = String::new();
            for i in 1..n {
                star.push_str(&format!("hub leaf{i}\n"));
            }
            let t = WeightedTree::parse(&star).unwrap();
            let ex = oracle_exact(&t, 0).unwrap();
            assert_eq!(
                ex.cover_return,
                closed_form_cover_return(Family::Star, n, StartRole::Center).unwrap(),
                "star n={n}"
            );
            assert_eq!(
                ex.cover,
                closed_form_cover(Family::Star, n, StartRole::Center).unwrap(),
                "star n={n} cover"
            );
        }
    }
}
