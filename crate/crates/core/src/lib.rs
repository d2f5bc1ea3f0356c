//! Exact-arithmetic toolkit for line arrangements and (p,q)-nets in the
//! projective plane: fields, projective geometry, Latin square species,
//! arrangement/line correspondence, symbolic realization, net verification.

pub mod arrange;
pub mod field;
pub mod geom;
pub mod latin;
pub mod poly;
pub mod solve;
