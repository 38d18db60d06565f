pub mod session;
pub mod tntp;

pub use session::{load_session, save_session, SCHEMA_VERSION};
pub use tntp::{
    load_network, parse_coords, parse_network, parse_trips, serialize_network, NetworkFile,
    TripsFile,
};
