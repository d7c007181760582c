//! Records and fixed-precision text output.

use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{LhfError, Result};
use crate::lhf::{asymptotic_fit, default_window, ScfResult};
use crate::occupations::{build_density_matrix, spin_density, Shell, Spin};
use crate::radial::RadialGrid;

/// Twelve significant digits in exponent notation.
pub fn fmt_num(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.11e}")
    } else {
        "nan".into()
    }
}

/// `x` rounded to twelve significant digits.
pub fn round12(x: f64) -> f64 {
    if x.is_finite() {
        fmt_num(x).parse().unwrap_or(x)
    } else {
        x
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Eigenvalue {
    #[serde(with = "shell_label")]
    pub shell: Shell,
    pub spin: Spin,
    pub energy: f64,
}

/// Result of one converged point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointRecord {
    pub n_total: f64,
    pub n_up: f64,
    pub n_down: f64,
    pub alpha: f64,
    pub beta: f64,
    pub e_direct: f64,
    pub e_dft: f64,
    pub e_x: f64,
    pub identity_residual: f64,
    pub eigenvalues: Vec<Eigenvalue>,
    pub c_up: f64,
    pub c_down: f64,
    pub g_alpha: f64,
    pub g_beta: f64,
    /// Coefficient `a` of the `a/r + c` tail fit of `v_x`, per spin.
    pub tail_slope: [f64; 2],
    pub iterations: usize,
    pub last_change: f64,
}

impl PointRecord {
    pub fn from_result(grid: &RadialGrid, res: &ScfResult) -> Result<Self> {
        let spec = &res.spec;
        let fit = asymptotic_fit(grid, &res.potentials.v_x, default_window(grid))?;
        let mut eigenvalues: Vec<Eigenvalue> = res
            .orbitals
            .iter()
            .map(|o| Eigenvalue {
                shell: o.shell,
                spin: o.spin,
                energy: round12(o.energy),
            })
            .collect();
        eigenvalues.sort_by_key(|e| (e.spin.index(), e.shell));
        let [n_up, n_down] = spec.counts(spec.alpha);
        Ok(Self {
            n_total: round12(spec.total_electrons()),
            n_up: round12(n_up),
            n_down: round12(n_down),
            alpha: round12(spec.alpha),
            beta: round12(spec.potential_fraction()),
            e_direct: round12(res.e_direct),
            e_dft: round12(res.e_dft),
            e_x: round12(res.e_x),
            identity_residual: round12(res.identity_residual),
            eigenvalues,
            c_up: round12(res.potentials.constants[0]),
            c_down: round12(res.potentials.constants[1]),
            g_alpha: round12(res.potentials.g_alpha),
            g_beta: round12(res.potentials.g_beta),
            tail_slope: [round12(fit[0].0), round12(fit[1].0)],
            iterations: res.iterations,
            last_change: round12(res.last_change),
        })
    }

    pub fn eigenvalue(&self, shell: Shell, spin: Spin) -> Option<f64> {
        self.eigenvalues
            .iter()
            .find(|e| e.shell == shell && e.spin == spin)
            .map(|e| e.energy)
    }
}

pub fn status_label(err: &LhfError) -> &'static str {
    match err {
        LhfError::NotConverged { .. } | LhfError::Singular(_) | LhfError::Eigensolver { .. } => {
            "not_converged"
        }
        LhfError::Unbound(_) => "unbound",
        LhfError::Io(_) => "io",
        _ => "config",
    }
}

/// Scan table in the order of `rows`.
pub fn scan_csv(rows: &[(f64, std::result::Result<PointRecord, String>)]) -> String {
    let levels: BTreeSet<(usize, Shell)> = rows
        .iter()
        .filter_map(|(_, r)| r.as_ref().ok())
        .flat_map(|r| r.eigenvalues.iter().map(|e| (e.spin.index(), e.shell)))
        .collect();
    let spin_of = |i: usize| if i == 0 { Spin::Up } else { Spin::Down };
    let mut out = String::from("N,N_up,N_down,alpha,beta,E_direct,E_dft,E_x,identity_residual");
    for (s, shell) in &levels {
        write!(out, ",eps_{}_{}", shell, spin_of(*s)).unwrap();
    }
    out.push_str(",c_up,c_down,G_alpha,G_beta,iterations,status\n");
    for (n, row) in rows {
        match row {
            Ok(r) => {
                let mut fields = vec![
                    r.n_total, r.n_up, r.n_down, r.alpha, r.beta, r.e_direct, r.e_dft, r.e_x,
                    r.identity_residual,
                ]
                .into_iter()
                .map(fmt_num)
                .collect::<Vec<_>>();
                for (s, shell) in &levels {
                    fields.push(
                        r.eigenvalue(*shell, spin_of(*s))
                            .map(fmt_num)
                            .unwrap_or_default(),
                    );
                }
                for x in [r.c_up, r.c_down, r.g_alpha, r.g_beta] {
                    fields.push(fmt_num(x));
                }
                fields.push(r.iterations.to_string());
                fields.push("ok".into());
                out.push_str(&fields.join(","));
            }
            Err(status) => {
                let blanks = 8 + levels.len() + 5;
                out.push_str(&fmt_num(*n));
                out.push_str(&",".repeat(blanks + 1));
                out.push_str(status);
            }
        }
        out.push('\n');
    }
    out
}

/// Columns `r, v_ext, v_H, v_x_up, v_x_down, n_up, n_down`.
pub fn profile_csv(grid: &RadialGrid, res: &ScfResult) -> Result<String> {
    let dm = build_density_matrix(&res.orbitals, &res.spec, res.spec.alpha)?;
    let n = spin_density(&dm);
    let p = &res.potentials;
    let mut out = String::from("r,v_ext,v_H,v_x_up,v_x_down,n_up,n_down\n");
    for i in 0..grid.len() {
        let row = [
            grid.r()[i],
            p.v_ext[i],
            p.v_h[i],
            p.v_x[0][i],
            p.v_x[1][i],
            n[0][i],
            n[1][i],
        ];
        out.push_str(&row.map(fmt_num).join(","));
        out.push('\n');
    }
    Ok(out)
}

/// Writes to `path`, or standard output when absent.
pub fn emit(path: Option<&Path>, text: &str) -> Result<()> {
    match path {
        Some(p) => std::fs::write(p, text)?,
        None => print!("{text}"),
    }
    Ok(())
}

mod shell_label {
    use serde::{Deserialize, Deserializer, Serializer};

    use crate::occupations::Shell;

    pub fn serialize<S: Serializer>(shell: &Shell, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(shell)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Shell, D::Error> {
        String::deserialize(d)?.parse().map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn twelve_digits() {
        assert_eq!(fmt_num(-2.0), "-2.00000000000e0");
        assert_eq!(fmt_num(1.0 / 3.0), "3.33333333333e-1");
        assert_eq!(round12(1.0 / 3.0), 0.333333333333);
        assert_eq!(fmt_num(f64::NAN), "nan");
    }

    #[test]
    fn header_only_for_empty_scan() {
        let csv = scan_csv(&[]);
        assert_eq!(csv.lines().count(), 1);
        assert!(csv.starts_with("N,N_up,N_down,alpha,beta,E_direct"));
        assert!(csv.trim_end().ends_with("iterations,status"));
    }

    #[test]
    fn failed_rows_keep_column_count() {
        let csv = scan_csv(&[(1.5, Err("unbound".into()))]);
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0].split(',').count(), lines[1].split(',').count());
        assert!(lines[1].ends_with(",unbound"));
    }
}
