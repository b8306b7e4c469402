use super::field::FieldElement;
use super::params::MimcParams;

/// Feistel MiMC with a fixed key; compresses `(left, right)` to the final
/// left word.
pub fn compress(params: &MimcParams, left: FieldElement, right: FieldElement) -> FieldElement {
    let (mut xl, mut xr) = (left, right);
    for c in &params.round_constants {
        let t = xl + params.key + *c;
        let next = xr + t.pow7();
        xr = xl;
        xl = next;
    }
    xl
}
