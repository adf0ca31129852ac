//! Plain-text formats for fields, Fermi branch curves and wave functions.

use std::fmt::Write as _;

use num_complex::Complex64;

use crate::contour::fmt_num;
use crate::error::{Error, Result};
use crate::fermi::FermiCurve;
use crate::packets::SampledWavefunction;
use crate::wigner::ScalarField;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    /// Header, then `np` rows of `nx` values.
    Matrix,
    /// `x p value` triples, x-major.
    Long,
}

impl std::str::FromStr for Format {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "matrix" => Ok(Format::Matrix),
            "long" => Ok(Format::Long),
            other => Err(format!("unknown format '{other}', expected matrix or long")),
        }
    }
}

/// Serializes a field; masked entries print as `nan`.
pub fn write_field(field: &ScalarField, format: Format) -> String {
    let g = &field.grid;
    let mut s = String::new();
    match format {
        Format::Matrix => {
            let _ = writeln!(s, "#nx {}", g.nx);
            let _ = writeln!(s, "#np {}", g.np);
            let _ = writeln!(s, "#x_range {} {}", fmt_num(g.x_min), fmt_num(g.x_max));
            let _ = writeln!(s, "#p_range {} {}", fmt_num(g.p_min), fmt_num(g.p_max));
            for j in 0..g.np {
                let row: Vec<String> = (0..g.nx).map(|i| fmt_num(field.get(i, j))).collect();
                let _ = writeln!(s, "{}", row.join("\t"));
            }
        }
        Format::Long => {
            let _ = writeln!(s, "# x\tp\tvalue");
            for i in 0..g.nx {
                for j in 0..g.np {
                    let _ = writeln!(
                        s,
                        "{}\t{}\t{}",
                        fmt_num(g.x(i)),
                        fmt_num(g.p(j)),
                        fmt_num(field.get(i, j))
                    );
                }
            }
        }
    }
    s
}

/// Branch file: header with ħ, then `x re(p+) im(p+) re(p-) im(p-)` per line.
pub fn write_curve(curve: &FermiCurve) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "# fermi-curve hbar={} samples={}", fmt_num(curve.hbar), curve.len());
    let _ = writeln!(s, "# x\tre_p_plus\tim_p_plus\tre_p_minus\tim_p_minus");
    for k in 0..curve.len() {
        let (a, b) = (curve.p_plus[k], curve.p_minus[k]);
        let _ = writeln!(
            s,
            "{}\t{}\t{}\t{}\t{}",
            fmt_num(curve.x[k]),
            fmt_num(a.re),
            fmt_num(a.im),
            fmt_num(b.re),
            fmt_num(b.im)
        );
    }
    s
}

pub fn read_curve(text: &str) -> Result<FermiCurve> {
    let mut hbar = None;
    let mut curve = FermiCurve {
        x: Vec::new(),
        p_plus: Vec::new(),
        p_minus: Vec::new(),
        real_branch: Vec::new(),
        valid: Vec::new(),
        hbar: 1.0,
    };
    for (n, raw) in text.lines().enumerate() {
        let line = raw.trim();
        let lineno = n + 1;
        if line.is_empty() {
            continue;
        }
        if let Some(h) = line.strip_prefix('#') {
            for tok in h.split_whitespace() {
                if let Some(v) = tok.strip_prefix("hbar=") {
                    let v: f64 = v.parse().map_err(|_| Error::Parse {
                        line: lineno,
                        msg: format!("bad hbar '{v}'"),
                    })?;
                    if v.is_nan() || v <= 0.0 {
                        return Err(Error::Parse { line: lineno, msg: "hbar must be positive".into() });
                    }
                    hbar = Some(v);
                }
            }
            continue;
        }
        let cols: Vec<&str> = line.split_whitespace().collect();
        if cols.len() != 5 {
            return Err(Error::Parse {
                line: lineno,
                msg: format!("expected 5 columns, found {}", cols.len()),
            });
        }
        let mut v = [0.0f64; 5];
        for (slot, tok) in v.iter_mut().zip(&cols) {
            *slot = tok.parse().map_err(|_| Error::Parse {
                line: lineno,
                msg: format!("not a number: '{tok}'"),
            })?;
        }
        if v[0].is_nan() {
            return Err(Error::Parse { line: lineno, msg: "position cannot be nan".into() });
        }
        let (a, b) = (Complex64::new(v[1], v[2]), Complex64::new(v[3], v[4]));
        let valid = v[1..].iter().all(|z| z.is_finite());
        curve.x.push(v[0]);
        curve.p_plus.push(a);
        curve.p_minus.push(b);
        curve.valid.push(valid);
        curve.real_branch.push(valid && a.im == 0.0 && b.im == 0.0);
    }
    if curve.x.is_empty() {
        return Err(Error::Parse { line: text.lines().count().max(1), msg: "no curve samples".into() });
    }
    curve.hbar = hbar.ok_or(Error::Parse { line: 1, msg: "missing '# fermi-curve hbar=' header".into() })?;
    Ok(curve)
}

/// `x re(ψ) im(ψ)` per line.
pub fn write_wavefunction(wf: &SampledWavefunction) -> String {
    let mut s = String::from("# x\tre_psi\tim_psi\n");
    for (k, z) in wf.psi.iter().enumerate() {
        let _ = writeln!(s, "{}\t{}\t{}", fmt_num(wf.x(k)), fmt_num(z.re), fmt_num(z.im));
    }
    s
}

/// Ordered `key = value` lines.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Metrics(pub Vec<(String, String)>);

impl Metrics {
    pub fn num(&mut self, key: &str, v: f64) -> &mut Self {
        self.0.push((key.to_string(), fmt_num(v)));
        self
    }

    pub fn text(&mut self, key: &str, v: impl ToString) -> &mut Self {
        self.0.push((key.to_string(), v.to_string()));
        self
    }

    pub fn list(&mut self, key: &str, vs: &[f64]) -> &mut Self {
        let s: Vec<String> = vs.iter().map(|v| fmt_num(*v)).collect();
        self.0.push((key.to_string(), s.join(",")));
        self
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.0.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }

    pub fn get_f64(&self, key: &str) -> Option<f64> {
        self.get(key)?.parse().ok()
    }

    pub fn render(&self) -> String {
        self.0.iter().map(|(k, v)| format!("{k} = {v}\n")).collect()
    }
}
