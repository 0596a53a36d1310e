//! Higher-order morphisms and the staged matching algorithm.

mod morphism;
mod search;

pub use morphism::{
    check_edges, check_first_order, check_higher_order, check_injection, check_morphism, check_totality,
    image_interface, Morphism, Violation,
};
pub use search::{find_morphisms, matches, search_morphisms, Availability, MatchContext, MatchError, MatchOptions};
