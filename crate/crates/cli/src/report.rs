use serde::Serialize;

use sdemoment::prosolve::Certificate;
use sdemoment::{ClosedForm, Monomial};

#[derive(Debug, Serialize)]
pub struct Sample {
    pub time: f64,
    pub value: f64,
}

#[derive(Debug, Serialize)]
pub struct SimComparison {
    pub time: f64,
    pub exact: f64,
    pub mean: f64,
    pub std_error: f64,
    pub paths: usize,
    pub pass: bool,
}

#[derive(Debug, Serialize)]
pub struct CertificateSummary {
    pub weights: Vec<u64>,
    pub target_degree: u64,
    pub max_observed: u64,
    pub degree_constant: u64,
    pub checked_edges: usize,
}

impl From<&Certificate> for CertificateSummary {
    fn from(c: &Certificate) -> Self {
        CertificateSummary {
            weights: c.weights.weights.clone(),
            target_degree: c.target_degree,
            max_observed: c.max_observed,
            degree_constant: c.degree_constant,
            checked_edges: c.checked_edges,
        }
    }
}

/// Everything `moment` found out about one target.
#[derive(Debug, Serialize)]
pub struct RunReport {
    pub model: String,
    pub target: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub alpha: Option<Monomial>,
    pub prosolvable: bool,
    pub partition: Option<String>,
    pub closure_size: usize,
    pub closure_seconds: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub closed_form: Option<ClosedForm>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub closed_form_text: Option<String>,
    pub notes: Vec<String>,
    pub samples: Vec<Sample>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub certificate: Option<CertificateSummary>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub simulation: Option<Vec<SimComparison>>,
}

impl RunReport {
    pub fn render(&self) -> String {
        let mut out = format!("model: {}\ntarget: E[{}]\n", self.model, self.target);
        out += &format!("prosolvable: {}", if self.prosolvable { "yes" } else { "no" });
        if let Some(p) = &self.partition {
            out += &format!(", partition {p}");
        }
        out += &format!("\nclosure: |S| = {} ({:.3} s)\n", self.closure_size, self.closure_seconds);
        if let Some(text) = &self.closed_form_text {
            out += &format!("closed form: {text}\n");
        }
        for note in &self.notes {
            out += &format!("note: {note}\n");
        }
        if let Some(c) = &self.certificate {
            out += &format!(
                "certificate: weights {:?}, max weighted degree {} <= {}, {} edges checked, C0 = {}\n",
                c.weights, c.max_observed, c.target_degree, c.checked_edges, c.degree_constant
            );
        }
        out += "time,value\n";
        for s in &self.samples {
            out += &format!("{},{}\n", s.time, s.value);
        }
        if let Some(sim) = &self.simulation {
            out += "time,exact,mc_mean,mc_std_error,paths,within_4se\n";
            for c in sim {
                out += &format!("{},{},{},{},{},{}\n", c.time, c.exact, c.mean, c.std_error, c.paths, c.pass);
            }
        }
        out
    }
}

#[derive(Debug, Serialize)]
pub struct TableRow {
    pub benchmark: String,
    pub moment: String,
    pub degree: u32,
    pub prosolvable: bool,
    pub published_prosolvable: bool,
    pub closure_size: usize,
    pub published_size: usize,
    pub closure_seconds: f64,
    pub solve: String,
    pub solve_seconds: f64,
    pub matches: bool,
}

#[derive(Debug, Serialize)]
pub struct CheckLine {
    pub name: String,
    pub status: String,
    pub detail: String,
}
