//! Plain-text model files.
//!
//! ```text
//! mlp sizes=3,20,20,1 activation=relu
//! w0 <row-major weights>
//! b0 <bias>
//! ...
//! ```
//!
//! A cylinder model starts with `cylinder inner=... outer=... activation=...`
//! and names its tensors `inner.w0`, ..., `outer.b2`. Values are written with
//! 17 significant digits so a save/load cycle is bit-exact.

use std::fmt::Write as _;
use std::path::Path;

use super::{Activation, CylinderNet, Mlp, Model};
use crate::error::{Error, Result};

fn write_tensors(out: &mut String, prefix: &str, mlp: &Mlp) {
    for l in 0..mlp.layers() {
        let (w, b) = mlp.layer(l);
        for (name, values) in [("w", w), ("b", b)] {
            out.push_str(prefix);
            let _ = write!(out, "{name}{l}");
            for v in values {
                let _ = write!(out, " {v:.16e}");
            }
            out.push('\n');
        }
    }
}

fn join(sizes: &[usize]) -> String {
    sizes.iter().map(|s| s.to_string()).collect::<Vec<_>>().join(",")
}

impl Model {
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        match self {
            Model::Mlp(m) => {
                let _ = writeln!(out, "mlp sizes={} activation={}", join(m.sizes()), m.activation().name());
                write_tensors(&mut out, "", m);
            }
            Model::Cylinder(c) => {
                let _ = writeln!(
                    out,
                    "cylinder inner={} outer={} activation={}",
                    join(c.inner.sizes()),
                    join(c.outer.sizes()),
                    c.inner.activation().name()
                );
                write_tensors(&mut out, "inner.", &c.inner);
                write_tensors(&mut out, "outer.", &c.outer);
            }
        }
        out
    }

    /// Parses [`Model::to_text`] output; `origin` names the source in errors.
    pub fn from_text(text: &str, origin: &str) -> Result<Model> {
        let mut p = Parser {
            origin,
            lines: text.lines().enumerate(),
        };
        let (line_no, header) = p.next_line()?;
        let mut words = header.split_whitespace();
        let kind = words.next().unwrap_or("");
        let mut fields = Vec::new();
        for w in words {
            let Some((k, v)) = w.split_once('=') else {
                return Err(p.error(line_no, column_of(header, w), format!("expected key=value, found `{w}`")));
            };
            fields.push((k, v, column_of(header, w)));
        }
        let get = |key: &str| -> Result<(&str, usize)> {
            fields
                .iter()
                .find(|(k, _, _)| *k == key)
                .map(|(_, v, c)| (*v, *c))
                .ok_or_else(|| p.error(line_no, 1, format!("header is missing `{key}`")))
        };
        let (act, act_col) = get("activation")?;
        let activation: Activation = act.parse().map_err(|e| p.error(line_no, act_col, e))?;
        let sizes = |key: &str| -> Result<Vec<usize>> {
            let (v, col) = get(key)?;
            v.split(',')
                .map(|s| s.parse::<usize>())
                .collect::<std::result::Result<Vec<_>, _>>()
                .map_err(|_| p.error(line_no, col, format!("bad layer sizes `{v}`")))
        };
        let model = match kind {
            "mlp" => {
                let sizes = sizes("sizes")?;
                let mlp = Mlp::zeros(sizes, activation).map_err(|e| p.error(line_no, 1, e.to_string()))?;
                Model::Mlp(p.read_tensors("", mlp)?)
            }
            "cylinder" => {
                let inner = Mlp::zeros(sizes("inner")?, activation).map_err(|e| p.error(line_no, 1, e.to_string()))?;
                let outer = Mlp::zeros(sizes("outer")?, activation).map_err(|e| p.error(line_no, 1, e.to_string()))?;
                let inner = p.read_tensors("inner.", inner)?;
                let outer = p.read_tensors("outer.", outer)?;
                Model::Cylinder(CylinderNet::new(inner, outer).map_err(|e| p.error(line_no, 1, e.to_string()))?)
            }
            other => return Err(p.error(line_no, 1, format!("unknown model kind `{other}`"))),
        };
        if let Some((i, line)) = p.lines.find(|(_, l)| !l.trim().is_empty()) {
            return Err(p.error(i + 1, 1, format!("trailing content `{}`", line.trim())));
        }
        Ok(model)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_text())?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Model> {
        let text = std::fs::read_to_string(path)?;
        Model::from_text(&text, &path.display().to_string())
    }
}

fn column_of(line: &str, word: &str) -> usize {
    word.as_ptr() as usize - line.as_ptr() as usize + 1
}

struct Parser<'a, I> {
    origin: &'a str,
    lines: I,
}

impl<'a, I: Iterator<Item = (usize, &'a str)>> Parser<'a, I> {
    fn error(&self, line: usize, column: usize, message: String) -> Error {
        Error::Parse {
            path: self.origin.to_string(),
            line,
            column,
            message,
        }
    }

    fn next_line(&mut self) -> Result<(usize, &'a str)> {
        match self.lines.find(|(_, l)| !l.trim().is_empty()) {
            Some((i, l)) => Ok((i + 1, l)),
            None => Err(self.error(0, 0, "unexpected end of file".into())),
        }
    }

    fn read_tensors(&mut self, prefix: &str, mut mlp: Mlp) -> Result<Mlp> {
        for l in 0..mlp.layers() {
            let (w, b) = mlp.layer_mut(l);
            for (name, dest) in [("w", w), ("b", b)] {
                let want = format!("{prefix}{name}{l}");
                let (line_no, line) = self.next_line()?;
                let mut words = line.split_whitespace();
                let tag = words.next().unwrap_or("");
                if tag != want {
                    return Err(self.error(line_no, column_of(line, tag), format!("expected tensor `{want}`, found `{tag}`")));
                }
                let mut count = 0;
                for word in words {
                    let v: f64 = word
                        .parse()
                        .map_err(|_| self.error(line_no, column_of(line, word), format!("bad number `{word}`")))?;
                    if count < dest.len() {
                        dest[count] = v;
                    }
                    count += 1;
                }
                if count != dest.len() {
                    return Err(self.error(
                        line_no,
                        1,
                        format!("tensor `{want}` has {count} values, expected {}", dest.len()),
                    ));
                }
            }
        }
        Ok(mlp)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::StreamKey;
    use proptest::prelude::*;

    #[test]
    fn mlp_round_trip() {
        let m = Model::Mlp(Mlp::init(vec![3, 7, 5, 2], Activation::Tanh, &mut StreamKey::new(1).rng()).unwrap());
        let text = m.to_text();
        assert!(text.starts_with("mlp sizes=3,7,5,2 activation=tanh\nw0 "));
        assert_eq!(text.lines().count(), 1 + 6);
        assert_eq!(Model::from_text(&text, "m").unwrap(), m);
    }

    #[test]
    fn cylinder_round_trip() {
        let c = CylinderNet::init(2, &[4, 4], 3, &[4], 1, Activation::Relu, &mut StreamKey::new(2).rng()).unwrap();
        let m = Model::Cylinder(c);
        let text = m.to_text();
        assert!(text.starts_with("cylinder inner=2,4,4,3 outer=3,4,1 activation=relu\n"));
        assert_eq!(Model::from_text(&text, "c").unwrap(), m);
    }

    #[test]
    fn file_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("net.model");
        let m = Model::Mlp(Mlp::init(vec![2, 3, 1], Activation::Relu, &mut StreamKey::new(3).rng()).unwrap());
        m.save(&path).unwrap();
        assert_eq!(Model::load(&path).unwrap(), m);
    }

    #[test]
    fn errors_carry_positions() {
        let bad = "mlp sizes=2,2,1 activation=relu\nw0 1 2 3 4\nb0 0 x\n";
        let msg = Model::from_text(bad, "f.model").unwrap_err().to_string();
        assert_eq!(msg, "f.model:3:6: bad number `x`");
        let short = "mlp sizes=1,1,1 activation=relu\nw0 1\nb0 0\nw1 1\n";
        assert!(Model::from_text(short, "s").is_err());
        let wrong = "mlp sizes=1,1,1 activation=sigmoid\n";
        assert!(Model::from_text(wrong, "s").unwrap_err().to_string().starts_with("s:1:17:"));
        let extra = "mlp sizes=1,1,1 activation=relu\nw0 1\nb0 0\nw1 1\nb1 0\nw2 3\n";
        assert!(Model::from_text(extra, "s").is_err());
    }

    proptest! {
        #[test]
        fn round_trip_is_bit_exact(params in proptest::collection::vec(prop::num::f64::NORMAL | prop::num::f64::SUBNORMAL | prop::num::f64::ZERO, 13)) {
            let m = Model::Mlp(Mlp::from_params(vec![2, 3, 1], Activation::Tanh, params.clone()).unwrap());
            let back = Model::from_text(&m.to_text(), "p").unwrap();
            let Model::Mlp(back) = back else { panic!("kind changed") };
            let bits: Vec<u64> = back.params().iter().map(|v| v.to_bits()).collect();
            let want: Vec<u64> = params.iter().map(|v| v.to_bits()).collect();
            prop_assert_eq!(bits, want);
        }
    }
}
