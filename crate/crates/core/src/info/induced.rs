//! Laws induced by pushing a source through a reconstruction kernel.

use super::{DistortionSpec, InfoError, JointPmf, JointSource, ReconstructionKernel};

/// Everything downstream modules need about the pair (source, kernel).
#[derive(Debug, Clone)]
pub struct InducedLaws {
    /// `p_xhat_given_y[y][xhat]`
    pub p_xhat_given_y: Vec<Vec<f64>>,
    pub p_xhat: Vec<f64>,
    /// Joint over (x, xhat, y).
    pub joint: JointPmf,
    pub distortion: f64,
    pub distortion_per_y: Vec<f64>,
}

/// Induced reconstruction marginals: per-y law and overall law.
pub fn induced_marginals(
    source: &JointSource,
    kernel: &ReconstructionKernel,
) -> Result<(Vec<Vec<f64>>, Vec<f64>), InfoError> {
    kernel.check_compatible(source)?;
    let (ny, nhat) = (source.num_y(), kernel.num_xhat());
    let mut per_y = vec![vec![0.0; nhat]; ny];
    let mut overall = vec![0.0; nhat];
    for y in 0..ny {
        let cond = source.x_given_y(y);
        for x in 0..source.num_x() {
            if cond[x] == 0.0 {
                continue;
            }
            for (k, &q) in kernel.row(x, y).iter().enumerate() {
                per_y[y][k] += cond[x] * q;
            }
        }
        for k in 0..nhat {
            overall[k] += source.p_y()[y] * per_y[y][k];
        }
    }
    Ok((per_y, overall))
}

/// Full induced laws, including the (x, xhat, y) joint and the expected
/// distortion overall and per y.
pub fn induced_laws(
    source: &JointSource,
    kernel: &ReconstructionKernel,
    distortion: &DistortionSpec,
) -> Result<InducedLaws, InfoError> {
    kernel.check_compatible(source)?;
    if distortion.num_x() != source.num_x() || distortion.num_xhat() != kernel.num_xhat() {
        return Err(InfoError::ShapeMismatch {
            context: format!(
                "distortion table is {}x{}, expected {}x{}",
                distortion.num_x(),
                distortion.num_xhat(),
                source.num_x(),
                kernel.num_xhat()
            ),
        });
    }
    let (nx, ny, nhat) = (source.num_x(), source.num_y(), kernel.num_xhat());
    let (p_xhat_given_y, p_xhat) = induced_marginals(source, kernel)?;

    let mut flat = vec![0.0; nx * nhat * ny];
    let mut per_y = vec![0.0; ny];
    for x in 0..nx {
        for y in 0..ny {
            let pxy = source.p_xy(x, y);
            if pxy == 0.0 {
                continue;
            }
            for (k, &q) in kernel.row(x, y).iter().enumerate() {
                flat[(x * nhat + k) * ny + y] = pxy * q;
                per_y[y] += (pxy / source.p_y()[y]) * q * distortion.value(x, k);
            }
        }
    }
    let distortion_total = per_y
        .iter()
        .zip(source.p_y())
        .map(|(d, py)| d * py)
        .sum::<f64>();
    let joint = JointPmf::new(
        vec!["x".to_string(), "xhat".to_string(), "y".to_string()],
        vec![nx, nhat, ny],
        flat,
    )?;
    Ok(InducedLaws {
        p_xhat_given_y,
        p_xhat,
        joint,
        distortion: distortion_total,
        distortion_per_y: per_y,
    })
}

/// I(X; X̂ | Y) in bits for the kernel's induced joint: the trade-off
/// solvers' objective, computed by direct summation.
pub fn kernel_cmi_bits(
    source: &JointSource,
    kernel: &ReconstructionKernel,
) -> Result<f64, InfoError> {
    kernel.check_compatible(source)?;
    let (per_y, _) = induced_marginals(source, kernel)?;
    let mut total = 0.0;
    for y in 0..source.num_y() {
        let cond = source.x_given_y(y);
        let mut iy = 0.0;
        for x in 0..source.num_x() {
            if cond[x] == 0.0 {
                continue;
            }
            for (k, &q) in kernel.row(x, y).iter().enumerate() {
                if q > 0.0 && per_y[y][k] > 0.0 {
                    iy += cond[x] * q * (q / per_y[y][k]).log2();
                }
            }
        }
        total += source.p_y()[y] * iy;
    }
    Ok(total.max(0.0))
}
