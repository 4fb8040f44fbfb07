pub mod instances;
pub mod milp;
pub mod model;
pub mod pipeline;
pub mod robust;
pub mod search;
pub mod sensitivity;
