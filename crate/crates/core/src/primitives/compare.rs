use crate::error::{Error, Result};
use crate::ring::Ring;
use crate::sharing::{Party, RepShare};
use crate::transport::Transport;

impl<T: Transport> Party<T> {
    /// `[x < 0]` on the signed view, for each element.
    pub fn ltz(&mut self, x: &[RepShare]) -> Result<Vec<RepShare>> {
        let signs = self.sign_bits(x)?;
        self.bits_to_arith(&signs)
    }

    /// `[x < y]`. Requires `|x − y| < 2^63`.
    pub fn lt(&mut self, x: &[RepShare], y: &[RepShare]) -> Result<Vec<RepShare>> {
        check_len(x, y)?;
        let d: Vec<RepShare> = x.iter().zip(y).map(|(a, b)| *a - *b).collect();
        self.ltz(&d)
    }

    /// `[x < c]` for a public ring constant.
    pub fn lt_public(&mut self, x: &[RepShare], c: Ring) -> Result<Vec<RepShare>> {
        let d: Vec<RepShare> = x.iter().map(|s| self.add_public(*s, -c)).collect();
        self.ltz(&d)
    }

    /// `[x > y]`, defined as `[y < x]`.
    pub fn gt(&mut self, x: &[RepShare], y: &[RepShare]) -> Result<Vec<RepShare>> {
        self.lt(y, x)
    }

    /// `[x == y]`, as `1 − [d < 0] − [−d < 0]` with `d = x − y`; both signs
    /// come from one batched decomposition.
    pub fn eq(&mut self, x: &[RepShare], y: &[RepShare]) -> Result<Vec<RepShare>> {
        check_len(x, y)?;
        let n = x.len();
        let mut d: Vec<RepShare> = x.iter().zip(y).map(|(a, b)| *a - *b).collect();
        let negated: Vec<RepShare> = d.iter().map(|s| -*s).collect();
        d.extend(negated);
        let neg = self.ltz(&d)?;
        Ok((0..n).map(|k| self.add_public(-neg[k] - neg[n + k], Ring::ONE)).collect())
    }

    /// `[x == c]` for a public ring constant.
    pub fn eq_public(&mut self, x: &[RepShare], c: Ring) -> Result<Vec<RepShare>> {
        let cs = vec![self.public(c); x.len()];
        self.eq(x, &cs)
    }

    /// `c ? a : b` for shared bits `c`, as `b + c·(a − b)`.
    pub fn select(&mut self, c: &[RepShare], a: &[RepShare], b: &[RepShare]) -> Result<Vec<RepShare>> {
        check_len(a, b)?;
        let diff: Vec<RepShare> = a.iter().zip(b).map(|(a, b)| *a - *b).collect();
        let prod = self.mul(c, &diff)?;
        Ok(b.iter().zip(prod).map(|(b, p)| *b + p).collect())
    }

    /// Maximum of a non-empty vector by a balanced tournament.
    pub fn max(&mut self, v: &[RepShare]) -> Result<RepShare> {
        Ok(self.max_groups(&[v.to_vec()])?[0])
    }

    /// Maximum of each group; all groups advance through the tournament
    /// together, one comparison layer per round of pairings.
    pub fn max_groups(&mut self, groups: &[Vec<RepShare>]) -> Result<Vec<RepShare>> {
        if groups.iter().any(|g| g.is_empty()) {
            return Err(Error::argument("maximum of an empty vector"));
        }
        let mut level: Vec<Vec<RepShare>> = groups.to_vec();
        while level.iter().any(|g| g.len() > 1) {
            let (mut left, mut right) = (Vec::new(), Vec::new());
            for g in &level {
                for pair in g.chunks_exact(2) {
                    left.push(pair[0]);
                    right.push(pair[1]);
                }
            }
            let right_bigger = self.lt(&left, &right)?;
            let winners = self.select(&right_bigger, &right, &left)?;
            let mut it = winners.into_iter();
            for g in level.iter_mut() {
                let odd = (g.len() % 2 == 1).then(|| g[g.len() - 1]);
                let mut next: Vec<RepShare> = it.by_ref().take(g.len() / 2).collect();
                next.extend(odd);
                *g = next;
            }
        }
        Ok(level.into_iter().map(|g| g[0]).collect())
    }
}

fn check_len(x: &[RepShare], y: &[RepShare]) -> Result<()> {
    if x.len() != y.len() {
        return Err(Error::argument(format!("operand lengths {} and {}", x.len(), y.len())));
    }
    Ok(())
}
