//! Eigenvalue-only LAPACK calls on column-major complex matrices.

use super::ProcessError;
use num_complex::Complex64;

/// Eigenvalues of an upper Hessenberg matrix (destroyed on return).
pub(crate) fn hessenberg_eigenvalues(
    h: &mut [Complex64],
    n: usize,
) -> Result<Vec<Complex64>, ProcessError> {
    assert_eq!(h.len(), n * n);
    if n == 0 {
        return Ok(Vec::new());
    }
    let ni = n as i32;
    let mut w = vec![Complex64::new(0.0, 0.0); n];
    let mut z = vec![Complex64::new(0.0, 0.0); 1];
    let mut info = 0;
    let mut query = vec![Complex64::new(0.0, 0.0); 1];
    unsafe {
        lapack::zhseqr(
            b'E', b'N', ni, 1, ni, h, ni, &mut w, &mut z, 1, &mut query, -1, &mut info,
        );
    }
    let lwork = (query[0].re as usize).max(n).max(1);
    let mut work = vec![Complex64::new(0.0, 0.0); lwork];
    unsafe {
        lapack::zhseqr(
            b'E',
            b'N',
            ni,
            1,
            ni,
            h,
            ni,
            &mut w,
            &mut z,
            1,
            &mut work,
            lwork as i32,
            &mut info,
        );
    }
    if info != 0 {
        return Err(ProcessError::Numeric(format!(
            "zhseqr failed to converge (info = {info})"
        )));
    }
    Ok(w)
}

/// Eigenvalues of a general square matrix (balanced QR, destroyed on return).
pub(crate) fn eigenvalues(a: &mut [Complex64], n: usize) -> Result<Vec<Complex64>, ProcessError> {
    assert_eq!(a.len(), n * n);
    if n == 0 {
        return Ok(Vec::new());
    }
    let ni = n as i32;
    let mut w = vec![Complex64::new(0.0, 0.0); n];
    let mut vl = vec![Complex64::new(0.0, 0.0); 1];
    let mut vr = vec![Complex64::new(0.0, 0.0); 1];
    let mut rwork = vec![0.0; 2 * n];
    let mut info = 0;
    let mut query = vec![Complex64::new(0.0, 0.0); 1];
    unsafe {
        lapack::zgeev(
            b'N', b'N', ni, a, ni, &mut w, &mut vl, 1, &mut vr, 1, &mut query, -1, &mut rwork,
            &mut info,
        );
    }
    let lwork = (query[0].re as usize).max(2 * n).max(1);
    let mut work = vec![Complex64::new(0.0, 0.0); lwork];
    unsafe {
        lapack::zgeev(
            b'N',
            b'N',
            ni,
            a,
            ni,
            &mut w,
            &mut vl,
            1,
            &mut vr,
            1,
            &mut work,
            lwork as i32,
            &mut rwork,
            &mut info,
        );
    }
    if info != 0 {
        return Err(ProcessError::Numeric(format!(
            "zgeev failed to converge (info = {info})"
        )));
    }
    Ok(w)
}
