use super::field::FieldElement;
use super::params::PoseidonParams;

pub fn permute(params: &PoseidonParams, state: &mut [FieldElement]) {
    let width = params.width;
    debug_assert_eq!(state.len(), width);
    let half = params.full_rounds / 2;
    let total = params.full_rounds + params.partial_rounds;
    let mut scratch = vec![FieldElement::ZERO; width];
    for round in 0..total {
        let rc = &params.round_constants[round * width..(round + 1) * width];
        for (s, c) in state.iter_mut().zip(rc) {
            *s = *s + *c;
        }
        if round < half || round >= half + params.partial_rounds {
            for s in state.iter_mut() {
                *s = s.pow5();
            }
        } else {
            state[0] = state[0].pow5();
        }
        for (i, out) in scratch.iter_mut().enumerate() {
            *out = params.mds[i]
                .iter()
                .zip(state.iter())
                .fold(FieldElement::ZERO, |acc, (m, s)| acc + *m * *s);
        }
        state.copy_from_slice(&scratch);
    }
}

/// Width-3 Poseidon over `[0, left, right]`, output lane 0.
pub fn compress(params: &PoseidonParams, left: FieldElement, right: FieldElement) -> FieldElement {
    let mut state = [FieldElement::ZERO, left, right];
    permute(params, &mut state);
    state[0]
}
