use probeq_core::scalar::format_rational;
use probeq_core::{Distribution, Scalar};
use serde::Serialize;
use serde_json::{json, Value};

/// `println!` that ignores a closed stdout.
macro_rules! outln {
    ($($arg:tt)*) => {{
        use std::io::Write as _;
        let _ = writeln!(std::io::stdout().lock(), $($arg)*);
    }};
}

/// Decimal digits used when rendering exact values.
#[derive(Clone, Copy, Debug)]
pub struct Precision(pub usize);

/// An exact value next to its truncated decimal expansion.
#[derive(Serialize)]
pub struct Num {
    pub exact: String,
    pub decimal: String,
}

impl Precision {
    pub fn num(self, s: &Scalar) -> Num {
        Num { exact: s.to_string(), decimal: s.to_decimal(self.0) }
    }

    pub fn distribution(self, d: &Distribution) -> Value {
        let atoms: Vec<Value> = d
            .atoms()
            .iter()
            .map(|a| json!({ "outcome": format_rational(&a.outcome), "mass": self.num(&a.mass) }))
            .collect();
        json!({ "atoms": atoms })
    }
}

/// Prints a report; a closed stdout (e.g. `| head`) is not an error.
pub fn print_json(value: &impl Serialize) {
    let text = serde_json::to_string_pretty(value).expect("reports serialize");
    outln!("{text}");
}
