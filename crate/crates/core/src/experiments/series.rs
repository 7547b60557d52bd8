use crate::Error;

/// How per-hand values are smoothed for plotting.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Smoothing {
    /// Non-overlapping block means; a trailing partial block is dropped.
    #[default]
    Block,
    /// Mean of the trailing `window` values at every position.
    Sliding,
}

impl std::str::FromStr for Smoothing {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        match s {
            "block" => Ok(Smoothing::Block),
            "sliding" => Ok(Smoothing::Sliding),
            _ => Err(Error::Input(format!("unknown smoothing {s:?} (block|sliding)"))),
        }
    }
}

/// A labelled plot series. `x` is the number of hands covered at each point.
#[derive(Clone, Debug, PartialEq)]
pub struct Series {
    pub label: String,
    pub points: Vec<(f64, f64)>,
}

impl Series {
    pub fn ys(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.1).collect()
    }
}

fn check_window(len: usize, window: usize) -> Result<(), Error> {
    if window == 0 {
        return Err(Error::Input("window must be at least 1".into()));
    }
    if window > len {
        return Err(Error::Input(format!("window {window} exceeds series length {len}")));
    }
    Ok(())
}

/// Block means: point `b` is the mean of `values[b*w .. (b+1)*w]`, at
/// `x = (b+1)*w`.
pub fn moving_average(values: &[f64], window: usize) -> Result<Series, Error> {
    check_window(values.len(), window)?;
    let points = values
        .chunks_exact(window)
        .enumerate()
        .map(|(b, chunk)| {
            (
                ((b + 1) * window) as f64,
                chunk.iter().sum::<f64>() / window as f64,
            )
        })
        .collect();
    Ok(Series {
        label: String::new(),
        points,
    })
}

/// Trailing-window means at `x = i + 1` for every `i >= window - 1`.
pub fn sliding_average(values: &[f64], window: usize) -> Result<Series, Error> {
    check_window(values.len(), window)?;
    let points = values
        .windows(window)
        .enumerate()
        .map(|(i, w)| ((i + window) as f64, w.iter().sum::<f64>() / window as f64))
        .collect();
    Ok(Series {
        label: String::new(),
        points,
    })
}

pub fn smooth(values: &[f64], window: usize, how: Smoothing, label: &str) -> Result<Series, Error> {
    let mut s = match how {
        Smoothing::Block => moving_average(values, window)?,
        Smoothing::Sliding => sliding_average(values, window)?,
    };
    s.label = label.to_string();
    Ok(s)
}

/// Write several series sharing the same x values as one CSV table:
/// `x,<label1>,<label2>,...`.
pub fn series_csv(series: &[Series]) -> Result<String, Error> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header = vec!["hands".to_string()];
    header.extend(series.iter().map(|s| s.label.clone()));
    w.write_record(&header)?;
    if let Some(first) = series.first() {
        for (i, &(x, _)) in first.points.iter().enumerate() {
            let mut row = vec![format!("{x}")];
            for s in series {
                assert_eq!(s.points[i].0, x, "series x values differ");
                row.push(format!("{}", s.points[i].1));
            }
            w.write_record(&row)?;
        }
    }
    let bytes = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}
