//! Criterion benchmarks for the exact linear algebra, modular symbols and the census; see `benches/`.
