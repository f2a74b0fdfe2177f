use std::collections::BTreeMap;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Method {
    Get,
    Post,
}

/// Symbolic backend operations.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum RouteOp {
    Discovery,
    StaticArch,
    DynamicArch,
    CalibrationMetrics,
    CalibrationSupport,
    SubmitCircuit,
    JobStatus,
    JobMeasurements,
    JobCounts,
    JobCancel,
    SubmitCalibration,
    CalibrationStatus,
    CalibrationAbort,
}

impl RouteOp {
    pub const ALL: [RouteOp; 13] = [
        RouteOp::Discovery,
        RouteOp::StaticArch,
        RouteOp::DynamicArch,
        RouteOp::CalibrationMetrics,
        RouteOp::CalibrationSupport,
        RouteOp::SubmitCircuit,
        RouteOp::JobStatus,
        RouteOp::JobMeasurements,
        RouteOp::JobCounts,
        RouteOp::JobCancel,
        RouteOp::SubmitCalibration,
        RouteOp::CalibrationStatus,
        RouteOp::CalibrationAbort,
    ];

    pub fn name(self) -> &'static str {
        match self {
            RouteOp::Discovery => "discovery",
            RouteOp::StaticArch => "static_arch",
            RouteOp::DynamicArch => "dynamic_arch",
            RouteOp::CalibrationMetrics => "calibration_metrics",
            RouteOp::CalibrationSupport => "calibration_support",
            RouteOp::SubmitCircuit => "submit_circuit",
            RouteOp::JobStatus => "job_status",
            RouteOp::JobMeasurements => "job_measurements",
            RouteOp::JobCounts => "job_counts",
            RouteOp::JobCancel => "job_cancel",
            RouteOp::SubmitCalibration => "submit_calibration",
            RouteOp::CalibrationStatus => "calibration_status",
            RouteOp::CalibrationAbort => "calibration_abort",
        }
    }

    pub fn method(self) -> Method {
        match self {
            RouteOp::SubmitCircuit
            | RouteOp::JobCancel
            | RouteOp::SubmitCalibration
            | RouteOp::CalibrationAbort => Method::Post,
            _ => Method::Get,
        }
    }

    fn default_template(self) -> &'static str {
        match self {
            RouteOp::Discovery => "/quantum-computers",
            RouteOp::StaticArch => "/quantum-computers/{qc}/static-architecture",
            RouteOp::DynamicArch => "/quantum-computers/{qc}/dynamic-architecture/{calset}",
            RouteOp::CalibrationMetrics => "/calibration-sets/{calset}/metrics",
            RouteOp::CalibrationSupport => "/quantum-computers/{qc}/calibration-support",
            RouteOp::SubmitCircuit => "/quantum-computers/{qc}/jobs",
            RouteOp::JobStatus => "/jobs/{job}/status",
            RouteOp::JobMeasurements => "/jobs/{job}/measurements",
            RouteOp::JobCounts => "/jobs/{job}/counts",
            RouteOp::JobCancel => "/jobs/{job}/cancel",
            RouteOp::SubmitCalibration => "/quantum-computers/{qc}/calibration-jobs",
            RouteOp::CalibrationStatus => "/calibration-jobs/{job}",
            RouteOp::CalibrationAbort => "/calibration-jobs/{job}/abort",
        }
    }
}

/// Route templates with `{qc}`, `{calset}` and `{job}` placeholders.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RouteTable {
    templates: BTreeMap<RouteOp, String>,
}

impl Default for RouteTable {
    fn default() -> Self {
        Self {
            templates: RouteOp::ALL.iter().map(|op| (*op, op.default_template().to_string())).collect(),
        }
    }
}

impl RouteTable {
    pub fn with(mut self, op: RouteOp, template: impl Into<String>) -> Self {
        self.templates.insert(op, template.into());
        self
    }

    pub fn template(&self, op: RouteOp) -> &str {
        &self.templates[&op]
    }

    pub fn render(&self, op: RouteOp, params: &[(&str, &str)]) -> String {
        let mut path = self.template(op).to_string();
        for (name, value) in params {
            path = path.replace(&format!("{{{name}}}"), value);
        }
        path
    }
}
