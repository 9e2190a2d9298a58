mod common;

use common::gradcheck;

#[test]
fn analytic_gradients_match_central_differences() {
    for r in gradcheck::run(10, 7) {
        assert!(r.max_rel_err < 1e-4, "{}: relative error {:e}", r.name, r.max_rel_err);
    }
}
