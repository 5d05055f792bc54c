pub struct ErmeaConfig;
pub struct QualityReport;
pub struct SteadyStateResult;
pub enum Variant { Crb, Perlind, Dl }
