use crate::hull::Weights;

/// Euclidean projection of `y` onto `{α : α ≥ 0, Σ α = 1}` by sorting and
/// thresholding.
pub fn project_to_simplex(y: &[f64]) -> Weights {
    assert!(!y.is_empty(), "cannot project onto an empty simplex");
    let mut sorted = y.to_vec();
    sorted.sort_by(|a, b| b.total_cmp(a));
    let mut cumsum = 0.0;
    let mut theta = 0.0;
    for (j, u) in sorted.iter().enumerate() {
        cumsum += u;
        let t = (cumsum - 1.0) / (j + 1) as f64;
        if u - t > 0.0 {
            theta = t;
        }
    }
    Weights::from_nearly_simplex(y.iter().map(|v| (v - theta).max(0.0)).collect())
}
