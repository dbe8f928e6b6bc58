//! Hosts the `acceptance` test target; run it with
//! `cargo test -p carnot-ld-validation --test acceptance`.
