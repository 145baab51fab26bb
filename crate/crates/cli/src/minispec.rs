//! Inline specs such as `rotation:1,8` or `bernoulli:0.5,0.5`.

use mdimlab::harness::SystemSpec;
use mdimlab::measures::{parry, MeasureSpec};
use mdimlab::shift_systems::golden_mean;
use mdimlab::{Error, Result};

fn bad(what: &str, s: &str) -> Error {
    Error::Config(format!("cannot parse {what} {s:?}"))
}

fn list<T: std::str::FromStr>(s: &str, what: &str) -> Result<Vec<T>> {
    s.split(',').map(|x| x.trim().parse().map_err(|_| bad(what, s))).collect()
}

fn matrix<T: std::str::FromStr>(s: &str, what: &str) -> Result<Vec<Vec<T>>> {
    s.split(';').map(|row| list(row, what)).collect()
}

pub fn system(s: &str) -> Result<SystemSpec> {
    let (body, window) = match s.split_once('@') {
        Some((b, w)) => (b, Some(w.trim().parse::<usize>().map_err(|_| bad("window", s))?)),
        None => (s, None),
    };
    let (kind, args) = body.split_once(':').unwrap_or((body, ""));
    let spec = match kind.trim() {
        "rotation" => match list::<i64>(args, "rotation")?.as_slice() {
            &[p, q] if q > 0 => SystemSpec::Rotation { p, q: q as usize },
            _ => return Err(bad("rotation (expected P,Q)", s)),
        },
        "full" | "full_shift" => SystemSpec::FullShift {
            m: Some(args.trim().parse().map_err(|_| bad("full shift size", s))?),
            symbols: None,
            window,
        },
        "unit" | "unit_full_shift" => SystemSpec::UnitFullShift { window },
        "golden" | "golden_mean" => SystemSpec::GoldenMean { window },
        "sft" => SystemSpec::Sft {
            adjacency: matrix(args, "adjacency")?,
            symbols: None,
            window,
        },
        _ => return Err(bad("system", s)),
    };
    if window.is_some() && matches!(spec, SystemSpec::Rotation { .. }) {
        return Err(bad("system (rotations take no window)", s));
    }
    Ok(spec)
}

pub fn measure(s: &str) -> Result<MeasureSpec> {
    let (kind, args) = s.split_once(':').ok_or_else(|| bad("measure", s))?;
    match kind.trim() {
        "bernoulli" => MeasureSpec::bernoulli(list(args, "bernoulli")?),
        "markov" => MeasureSpec::markov(matrix(args, "transition matrix")?, Vec::new()),
        "parry" => match args.trim() {
            "golden" => parry(&golden_mean()),
            a => parry(&matrix::<u8>(a, "adjacency")?),
        },
        "mixture" => {
            let parts = args
                .split('+')
                .map(|part| {
                    let (w, m) = part.split_once('*').ok_or_else(|| bad("mixture component", part))?;
                    Ok((w.trim().parse::<f64>().map_err(|_| bad("mixture weight", part))?, measure(m)?))
                })
                .collect::<Result<Vec<_>>>()?;
            MeasureSpec::mixture(parts)
        }
        _ => Err(bad("measure", s)),
    }
    .map_err(|e| match e {
        Error::Config(_) => e,
        other => Error::Config(format!("measure {s:?}: {other}")),
    })
}
