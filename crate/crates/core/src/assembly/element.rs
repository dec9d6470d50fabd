use super::AssemblyError;

/// P1 mass matrix `area/12 [[2,1,1],[1,2,1],[1,1,2]]` of a unit coefficient.
pub fn p1_mass_element(p: [[f64; 2]; 3], index: usize) -> Result<[[f64; 3]; 3], AssemblyError> {
    let area = signed_area(p);
    if !(area > 0.0) {
        return Err(AssemblyError::DegenerateTriangle { index, area });
    }
    let d = area / 6.0;
    let o = area / 12.0;
    Ok([[d, o, o], [o, d, o], [o, o, d]])
}

/// P1 stiffness matrix of a unit coefficient.
pub fn p1_stiffness_element(p: [[f64; 2]; 3], index: usize) -> Result<[[f64; 3]; 3], AssemblyError> {
    let area = signed_area(p);
    if !(area > 0.0) {
        return Err(AssemblyError::DegenerateTriangle { index, area });
    }
    let mut b = [0.0; 3];
    let mut c = [0.0; 3];
    for i in 0..3 {
        let (j, k) = ((i + 1) % 3, (i + 2) % 3);
        b[i] = p[j][1] - p[k][1];
        c[i] = p[k][0] - p[j][0];
    }
    let mut out = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            out[i][j] = (b[i] * b[j] + c[i] * c[j]) / (4.0 * area);
        }
    }
    Ok(out)
}

/// 1D linear mass `len/6 [[2,1],[1,2]]`.
pub fn edge_mass_element(len: f64) -> [[f64; 2]; 2] {
    let d = len / 3.0;
    let o = len / 6.0;
    [[d, o], [o, d]]
}

/// 1D linear stiffness `1/len [[1,-1],[-1,1]]`.
pub fn edge_stiffness_element(len: f64) -> [[f64; 2]; 2] {
    let k = 1.0 / len;
    [[k, -k], [-k, k]]
}

pub(crate) fn signed_area(p: [[f64; 2]; 3]) -> f64 {
    0.5 * ((p[1][0] - p[0][0]) * (p[2][1] - p[0][1]) - (p[2][0] - p[0][0]) * (p[1][1] - p[0][1]))
}
