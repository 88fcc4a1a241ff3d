pub mod alpha;
pub mod critical;
pub mod dns;
pub mod general;
pub mod monodromy;
pub mod orbit;
pub mod period;
pub mod scan;
