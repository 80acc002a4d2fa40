"""Reduced-size parameters for fast scenario runs in tests."""

QUICK = {
    "merkle-gap": (30, {"eve_samples": 200, "eve_min_accepted": 20, "sampler_draws": 300}),
    "eve-attack": (10, {"eve_samples": 1500, "census_samples": 1000}),
    "counterexample": (30, {"eve_samples": 500, "eve_min_accepted": 20}),
    "disjointness": (10, {"trials_per_size": 400, "faith_trials": 200}),
    "lemma-check": (10, {"hybrid_batch": 5}),
    "transform-check": (200, {"census_samples": 500}),
}
