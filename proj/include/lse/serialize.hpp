#pragma once

#include "json.hpp"
#include "lse/grid.hpp"
#include "lse/gls.hpp"
#include "lse/postprocess.hpp"
#include "lse/solver.hpp"

namespace lse::serial {

using nlohmann::json;

/// Complex vectors as [[re, im], ...].
json complex_vector(const VectorXcd& v);
VectorXcd complex_vector_from(const json& j);

json to_json(const LineSpectralModel& m);
/// Accepts either "amps" ([[re, im], ...]) or "powers"; with powers the phases are drawn
/// from `rng` (zero when rng is null).
LineSpectralModel model_from_json(const json& j, Rng* rng = nullptr);

SamplingSpec sampling_from_json(const json& j);
json to_json(const SampleSet& s);

/// {"kind": "none" | "homoscedastic" | "heteroscedastic", "sigma" | "snr_db" | "sigmas"}
NoiseSpec noise_from_json(const json& j, int L);

json to_json(const Observation& obs);
/// Inverse of to_json(Observation); truth and sigma_truth are optional.
Observation observation_from_json(const json& j);

/// Missing keys keep their defaults. "tol" sets both tol_abs and tol_rel.
SolverOptions solver_options_from_json(const json& j, SolverOptions base = {});
json to_json(const SolverOptions& o);
GridOptions grid_options_from_json(const json& j, GridOptions base = {});

NoiseAssumption assumption_from_json(const json& j);

/// Q and Lambda are included only when `full` is set.
json to_json(const SdpSolution& s, bool full = false);
json to_json(const VandermondeResult& v);
json to_json(const GlsEstimate& e, bool full = false);
json to_json(const EquivalenceReport& r);
json to_json(const SorteResult& r);
json to_json(const FrameworkResult& r);
json to_json(const GridSolution& s, const GridDictionary& dict);
json to_json(const SandwichReport& r);
json to_json(const MuStarResult& r);
json to_json(const LassoCertificate& c);

}  // namespace lse::serial
