use serde::{Deserialize, Serialize};

/// Per-column centring and scaling. Constant columns are centred only.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Standardizer {
    pub mean: Vec<f64>,
    pub scale: Vec<f64>,
}

impl Standardizer {
    pub fn fit<'a, I>(rows: I, width: usize) -> Self
    where
        I: IntoIterator<Item = &'a [f64]>,
    {
        let rows: Vec<&[f64]> = rows.into_iter().collect();
        let n = rows.len() as f64;
        let mut mean = vec![0.0; width];
        for r in &rows {
            for (m, x) in mean.iter_mut().zip(*r) {
                *m += x;
            }
        }
        mean.iter_mut().for_each(|m| *m /= n);
        let mut var = vec![0.0; width];
        for r in &rows {
            for j in 0..width {
                var[j] += (r[j] - mean[j]).powi(2);
            }
        }
        let denom = (n - 1.0).max(1.0);
        let scale = var
            .into_iter()
            .map(|v| {
                let sd = (v / denom).sqrt();
                if sd > 1e-12 {
                    sd
                } else {
                    1.0
                }
            })
            .collect();
        Standardizer { mean, scale }
    }

    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        x.iter()
            .zip(self.mean.iter().zip(&self.scale))
            .map(|(v, (m, s))| (v - m) / s)
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_mean_unit_sd() {
        let rows = [vec![1.0, 5.0], vec![3.0, 5.0], vec![5.0, 5.0]];
        let s = Standardizer::fit(rows.iter().map(|r| r.as_slice()), 2);
        let z: Vec<Vec<f64>> = rows.iter().map(|r| s.apply(r)).collect();
        assert_eq!(z[0], vec![-1.0, 0.0]);
        assert_eq!(z[2], vec![1.0, 0.0]);
    }
}
