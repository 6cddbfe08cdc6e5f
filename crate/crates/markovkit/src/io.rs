//! JSON schemas and CSV emitters for the file-level interface.
//!
//! All schemas carry their own state labels and order every array by that
//! list, so files are self-describing and machine-checkable. Floats are
//! printed in scientific notation with 17 significant digits, which round
//! trips double precision losslessly and keeps repeated runs byte
//! identical. Parsers reject non-finite numbers and shape mismatches with
//! a parse error naming the offending field.
//!
//! Files are written atomically: content goes to a sibling temp file that
//! is renamed over the target, so readers never observe a torn write.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::conditions::ConditionReport;
use crate::decompose::ErgodicDecomposition;
use crate::economy::EconomyModel;
use crate::error::{Error, Result};
use crate::kernel::{MarkovKernel, Observable, SignedMeasure};
use crate::matrix::Mat;
use crate::simulate::{ConvergenceProfile, SimulationRun};
use crate::space::StateSpace;
use crate::spectral::SpectralSplit;

/// Transition matrix with its state labels; rows follow "states".
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct KernelFile {
    pub states: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

/// A measure or observable as one weight per state.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct VectorFile {
    pub states: Vec<String>,
    pub weights: Vec<f64>,
}

/// Economy model: shock kernel over exo states and the evolution law as a
/// map from "state|shock" (state labels are themselves "exo|endo") to the
/// successor state label.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ModelFile {
    pub exo_states: Vec<String>,
    pub endo_states: Vec<String>,
    pub q: Vec<Vec<f64>>,
    pub law: BTreeMap<String, String>,
}

/// Density grid for the uniform-integrability check: one density row per
/// measure, cell weights shared by all rows.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DensityFile {
    pub rows: Vec<Vec<f64>>,
    pub cell_weights: Vec<f64>,
}

/// Ergodic decomposition: classes and transient states by label, each
/// invariant measure and eigenfunction as a full-space weight array, and
/// the limit kernel row-major. All arrays follow "states".
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DecompositionFile {
    pub states: Vec<String>,
    pub classes: Vec<Vec<String>>,
    pub transient: Vec<String>,
    pub invariant_measures: Vec<Vec<f64>>,
    pub eigenfunctions: Vec<Vec<f64>>,
    pub limit_kernel: Vec<Vec<f64>>,
}

/// Peripheral spectral split. Complex entries are [re, im] pairs;
/// projections[i] belongs to eigenvalues[i], whose exact root of unity is
/// root_fractions[i] = [num, den] for exp(2 pi i num/den).
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SplitFile {
    pub states: Vec<String>,
    pub eigenvalues: Vec<[f64; 2]>,
    pub root_fractions: Vec<[u64; 2]>,
    pub projections: Vec<Vec<Vec<[f64; 2]>>>,
    pub residual: Vec<Vec<[f64; 2]>>,
    pub decay_rate: f64,
    pub decay_constant: f64,
}

/// Condition report witnesses; absent fields are omitted from the JSON.
#[derive(Clone, Debug, Default, Serialize, Deserialize)]
pub struct WitnessesFile {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub eps: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub minorizing_measure: Option<VectorFile>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub small_set: Option<Vec<String>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub k_steps: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub hitting_times: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub norm_gap: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub center_state: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sigma: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sigma_per_eps: Option<Vec<[f64; 2]>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub collapse_shock: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub collapse_state: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub collapse_steps: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub invariant_measure: Option<VectorFile>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub class_count: Option<u64>,
}

/// Condition report: condition name, verdict, witnesses, diagnostics.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ReportFile {
    pub condition: String,
    pub satisfied: bool,
    pub witnesses: WitnessesFile,
    pub diagnostics: Vec<String>,
}

/// Serializer writing every float as {:.16e}: 17 significant digits,
/// lossless for f64, identical across runs. Non-finite values abort.
struct SciFormatter;

impl serde_json::ser::Formatter for SciFormatter {
    fn write_f64<W: ?Sized + std::io::Write>(
        &mut self,
        writer: &mut W,
        value: f64,
    ) -> std::io::Result<()> {
        if !value.is_finite() {
            return Err(std::io::Error::new(
                std::io::ErrorKind::InvalidData,
                format!("non-finite float {value} cannot be serialized"),
            ));
        }
        write!(writer, "{value:.16e}")
    }

    // No schema serializes a null (absent options are skipped), so a null
    // here can only be serde_json masking a non-finite float.
    fn write_null<W: ?Sized + std::io::Write>(&mut self, _writer: &mut W) -> std::io::Result<()> {
        Err(std::io::Error::new(
            std::io::ErrorKind::InvalidData,
            "non-finite float cannot be serialized",
        ))
    }

    fn write_f32<W: ?Sized + std::io::Write>(
        &mut self,
        writer: &mut W,
        value: f32,
    ) -> std::io::Result<()> {
        self.write_f64(writer, value as f64)
    }
}

/// Serializes any schema value to its canonical JSON text, newline
/// terminated.
pub fn to_json_string<T: Serialize>(value: &T) -> Result<String> {
    let mut out = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut out, SciFormatter);
    value
        .serialize(&mut ser)
        .map_err(|e| Error::Parse(format!("serialization failed: {e}")))?;
    out.push(b'\n');
    String::from_utf8(out).map_err(|e| Error::Parse(format!("non-utf8 output: {e}")))
}

fn from_json<'a, T: Deserialize<'a>>(text: &'a str) -> Result<T> {
    serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))
}

fn check_finite(name: &str, values: &[f64]) -> Result<()> {
    if let Some(bad) = values.iter().find(|v| !v.is_finite()) {
        return Err(Error::Parse(format!("{name} contains non-finite value {bad}")));
    }
    Ok(())
}

fn check_grid(name: &str, rows: &[Vec<f64>], want_rows: usize, want_cols: usize) -> Result<()> {
    if rows.len() != want_rows {
        return Err(Error::Parse(format!(
            "{name} has {} rows, expected {want_rows}",
            rows.len()
        )));
    }
    for (i, row) in rows.iter().enumerate() {
        if row.len() != want_cols {
            return Err(Error::Parse(format!(
                "{name} row {i} has {} entries, expected {want_cols}",
                row.len()
            )));
        }
        check_finite(name, row)?;
    }
    Ok(())
}

/// Parses a kernel file; rows are validated and renormalized exactly.
pub fn parse_kernel(text: &str) -> Result<MarkovKernel<f64>> {
    let file: KernelFile = from_json(text)?;
    let space = StateSpace::new(file.states)?;
    check_grid("rows", &file.rows, space.size(), space.size())?;
    MarkovKernel::new_renormalized(space, Mat::from_rows(&file.rows)?)
}

pub fn kernel_file(kernel: &MarkovKernel<f64>) -> KernelFile {
    KernelFile {
        states: kernel.space().labels().to_vec(),
        rows: (0..kernel.size()).map(|i| kernel.matrix().row(i).to_vec()).collect(),
    }
}

fn parse_vector(text: &str) -> Result<(StateSpace, Vec<f64>)> {
    let file: VectorFile = from_json(text)?;
    let space = StateSpace::new(file.states)?;
    if file.weights.len() != space.size() {
        return Err(Error::Parse(format!(
            "weights has {} entries, expected {}",
            file.weights.len(),
            space.size()
        )));
    }
    check_finite("weights", &file.weights)?;
    Ok((space, file.weights))
}

pub fn parse_measure(text: &str) -> Result<SignedMeasure<f64>> {
    let (space, weights) = parse_vector(text)?;
    SignedMeasure::new(space, weights)
}

pub fn measure_file(measure: &SignedMeasure<f64>) -> VectorFile {
    VectorFile {
        states: measure.space().labels().to_vec(),
        weights: measure.weights().to_vec(),
    }
}

pub fn parse_observable(text: &str) -> Result<Observable<f64>> {
    let (space, values) = parse_vector(text)?;
    Observable::new(space, values)
}

pub fn observable_file(g: &Observable<f64>) -> VectorFile {
    VectorFile { states: g.space().labels().to_vec(), weights: g.values().to_vec() }
}

/// Parses a model file; the law map must cover every (state, shock) pair
/// exactly once, keys "exo|endo|shock".
pub fn parse_model(text: &str) -> Result<EconomyModel<f64>> {
    let file: ModelFile = from_json(text)?;
    let exo = StateSpace::new(file.exo_states)?;
    let endo = StateSpace::new(file.endo_states)?;
    check_grid("q", &file.q, exo.size(), exo.size())?;
    let q = MarkovKernel::new_renormalized(exo.clone(), Mat::from_rows(&file.q)?)?;

    // Build the product labels the same way the model will, then demand
    // the law table is total over them.
    let mut product = Vec::new();
    for e in exo.labels() {
        for d in endo.labels() {
            product.push(format!("{e}|{d}"));
        }
    }
    let mut used = 0usize;
    let mut law = Vec::with_capacity(product.len() * exo.size());
    let mut law_targets = Vec::new();
    for x in &product {
        for e in exo.labels() {
            let key = format!("{x}|{e}");
            let target = file.law.get(&key).ok_or_else(|| {
                Error::Parse(format!("law is missing the pair {key:?}"))
            })?;
            used += 1;
            law_targets.push(target.clone());
        }
    }
    if file.law.len() != used {
        let known: std::collections::BTreeSet<String> = product
            .iter()
            .flat_map(|x| exo.labels().iter().map(move |e| format!("{x}|{e}")))
            .collect();
        let stray = file
            .law
            .keys()
            .find(|k| !known.contains(*k))
            .cloned()
            .unwrap_or_default();
        return Err(Error::Parse(format!("law has unknown pair {stray:?}")));
    }
    let product_space = StateSpace::new(product)?;
    for t in &law_targets {
        law.push(product_space.require(t).map_err(|_| {
            Error::Parse(format!("law target {t:?} is not a product state"))
        })?);
    }
    EconomyModel::new(exo, endo, q, law)
}

pub fn model_file(model: &EconomyModel<f64>) -> ModelFile {
    let exo = model.exo_space();
    let space = model.state_space();
    let mut law = BTreeMap::new();
    for x in 0..space.size() {
        for e in 0..exo.size() {
            law.insert(
                format!("{}|{}", space.label(x), exo.label(e)),
                space.label(model.law_target(x, e)).to_string(),
            );
        }
    }
    ModelFile {
        exo_states: exo.labels().to_vec(),
        endo_states: model.endo_space().labels().to_vec(),
        q: (0..exo.size())
            .map(|i| model.shock_kernel().matrix().row(i).to_vec())
            .collect(),
        law,
    }
}

/// Parses a density file into the density grid and its cell weights.
pub fn parse_density(text: &str) -> Result<(Mat<f64>, Vec<f64>)> {
    let file: DensityFile = from_json(text)?;
    if file.rows.is_empty() {
        return Err(Error::Parse("density file has no rows".into()));
    }
    check_grid("rows", &file.rows, file.rows.len(), file.cell_weights.len())?;
    check_finite("cell_weights", &file.cell_weights)?;
    Ok((Mat::from_rows(&file.rows)?, file.cell_weights))
}

pub fn decomposition_file(d: &ErgodicDecomposition<f64>) -> DecompositionFile {
    let space = d.kernel().space();
    let label_all = |ids: &[usize]| -> Vec<String> {
        ids.iter().map(|&i| space.label(i).to_string()).collect()
    };
    DecompositionFile {
        states: space.labels().to_vec(),
        classes: (0..d.class_count()).map(|a| label_all(d.class_states(a))).collect(),
        transient: label_all(d.transient()),
        invariant_measures: (0..d.class_count())
            .map(|a| d.invariant_measure(a).weights().to_vec())
            .collect(),
        eigenfunctions: (0..d.class_count())
            .map(|a| d.eigenfunction(a).values().to_vec())
            .collect(),
        limit_kernel: (0..space.size())
            .map(|i| d.limit_kernel().matrix().row(i).to_vec())
            .collect(),
    }
}

pub fn split_file(s: &SpectralSplit<f64>) -> SplitFile {
    let complex_rows = |m: &Mat<num_complex::Complex<f64>>| -> Vec<Vec<[f64; 2]>> {
        (0..m.nrows())
            .map(|i| m.row(i).iter().map(|c| [c.re, c.im]).collect())
            .collect()
    };
    SplitFile {
        states: s.kernel().space().labels().to_vec(),
        eigenvalues: s.eigenvalues().iter().map(|c| [c.re, c.im]).collect(),
        root_fractions: s.root_fractions().iter().map(|&(n, d)| [n, d]).collect(),
        projections: s.projections().iter().map(complex_rows).collect(),
        residual: complex_rows(s.residual()),
        decay_rate: s.decay_rate(),
        decay_constant: s.decay_constant(),
    }
}

pub fn report_file(r: &ConditionReport<f64>) -> ReportFile {
    let w = &r.witnesses;
    ReportFile {
        condition: r.condition.name().to_string(),
        satisfied: r.satisfied,
        witnesses: WitnessesFile {
            eps: w.eps,
            minorizing_measure: w.minorizing_measure.as_ref().map(measure_file),
            small_set: w.small_set.clone(),
            k_steps: w.k_steps,
            hitting_times: w.hitting_times.clone(),
            norm_gap: w.norm_gap,
            center_state: w.center_state.clone(),
            sigma: w.sigma,
            sigma_per_eps: w
                .sigma_per_eps
                .as_ref()
                .map(|v| v.iter().map(|&(e, s)| [e, s]).collect()),
            collapse_shock: w.collapse_shock.clone(),
            collapse_state: w.collapse_state.clone(),
            collapse_steps: w.collapse_steps,
            invariant_measure: w.invariant_measure.as_ref().map(measure_file),
            class_count: w.class_count,
        },
        diagnostics: r.diagnostics.clone(),
    }
}

/// One float in the canonical 17-significant-digit form used everywhere.
pub fn sci(x: f64) -> String {
    format!("{x:.16e}")
}

/// CSV for one simulation run: seed, length, estimate, standard error.
pub fn run_csv(run: &SimulationRun<f64>, estimate: f64, stderr: f64) -> String {
    format!(
        "seed,n,estimate,stderr\n{},{},{},{}\n",
        run.seed(),
        run.len(),
        sci(estimate),
        sci(stderr)
    )
}

/// CSV of the visited state indices, one step per row.
pub fn path_csv(run: &SimulationRun<f64>) -> String {
    let mut out = String::from("step,state\n");
    for (i, &x) in run.path().iter().enumerate() {
        out.push_str(&format!("{i},{x}\n"));
    }
    out
}

/// CSV for a convergence profile: horizon, deviation, scaled deviation.
pub fn profile_csv(p: &ConvergenceProfile<f64>) -> String {
    let mut out = String::from("n,deviation,scaled\n");
    for &(n, dev) in &p.points {
        out.push_str(&format!("{n},{},{}\n", sci(dev), sci(n as f64 * dev)));
    }
    out
}

/// Writes content through a sibling temp file and an atomic rename.
pub fn atomic_write(path: &Path, content: &str) -> Result<()> {
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".tmp~");
    let tmp = std::path::PathBuf::from(tmp);
    std::fs::write(&tmp, content)?;
    std::fs::rename(&tmp, path)?;
    Ok(())
}
