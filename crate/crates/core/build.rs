fn main() {
    // Link the system OpenBLAS (provides BLAS + LAPACK symbols for lax/lapack-sys).
    println!("cargo:rustc-link-lib=dylib=openblas");
    println!("cargo:rustc-link-search=native=/usr/lib/x86_64-linux-gnu");
}
