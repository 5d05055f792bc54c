// placeholder so the crate compiles while modules land
pub struct IndexSet;
pub struct Generator;
pub struct GeneratorParams;
