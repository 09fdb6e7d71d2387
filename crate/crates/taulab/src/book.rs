//! Keeps the book's code blocks honest: every chapter is included as a doc
//! comment here, so `cargo test --doc` runs the snippets exactly as printed.

macro_rules! chapter {
    ($name:ident, $path:literal) => {
        #[doc = include_str!($path)]
        pub mod $name {}
    };
}

chapter!(grids_and_bilinear_operators, "../../../book/src/grids-and-bilinear-operators.md");
chapter!(special_functions, "../../../book/src/special-functions.md");
chapter!(epigraph_walks, "../../../book/src/epigraph-walks.md");
chapter!(kernels_and_determinants, "../../../book/src/kernels-and-determinants.md");
chapter!(simulation, "../../../book/src/simulation.md");
chapter!(hierarchies, "../../../book/src/hierarchies.md");
chapter!(zero_curvature, "../../../book/src/zero-curvature.md");
chapter!(scaling_limits, "../../../book/src/scaling-limits.md");
