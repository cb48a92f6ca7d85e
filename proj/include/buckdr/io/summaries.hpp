#pragma once

#include <vector>

#include "buckdr/buck/model.hpp"
#include "buckdr/design/controller.hpp"
#include "buckdr/dr/schemes.hpp"
#include "buckdr/io/config.hpp"
#include "buckdr/io/report.hpp"
#include "buckdr/robust/analysis.hpp"
#include "buckdr/sim/monte_carlo.hpp"
#include "buckdr/sim/simulate.hpp"

namespace buckdr::io {

const char* channel_name(dr::Channel c);

json params_json(const buck::BuckParams& p);
json box_json(const buck::UncertaintyBox& box);
/// Every resolved key of the configuration.
json config_json(const RunConfig& cfg);
/// Ascending coefficients.
json tf_json(const lti::RationalTF& g);

json model_json(const buck::BuckParams& p, const buck::UncertaintyBox& box);
/// Magnitude and phase (degrees) of P11, P12, P21, P22.
Table plant_bode(const buck::BuckParams& p, const lti::FrequencyGrid& grid);

json design_json(const design::Design& d, const buck::BuckParams& p, double Gf, double R1);
/// m, n, omega, bound, T_abs, margin.
Table mask_table(const design::Design& d, const buck::BuckParams& p, double Gf);
/// omega, S_abs, T_abs, K_abs, mask_bound.
Table loop_bode(const design::Design& d, const buck::BuckParams& p, double Gf, const lti::FrequencyGrid& grid);

json scheme_json(const dr::DRScheme& s, const buck::BuckParams& p, const std::array<double, 3>& uio_lambda);
/// Magnitude and phase of each estimator channel and the compensator.
Table scheme_bode(const dr::DRScheme& s, const lti::FrequencyGrid& grid);

json condition_json(const robust::RobustReport& r, double critical_p_H);
/// omega, W_r_abs, N, Lambda, lhs, rhs, margin.
Table condition_table(const robust::RobustReport& r, const robust::EnvelopeCurve& lambda,
                      const robust::EnvelopeCurve& n);
json scan_json(dr::Kind kind, const robust::RobustReport& r);

json metrics_json(const sim::Metrics& m);
/// t, v_o, i_L, v_c_tot, v_inj, d, i_out_true, i_out_hat, v_saw, v_SW.
Table trace_table(const sim::SimTrace& tr);

json mc_summary_json(const sim::McSummary& s, const sim::McScenario& scenario);
/// t, then min/mean/max of v_o, v_c_tot, v_inj and i_out_hat.
Table envelope_table(const sim::McSummary& s, const sim::McSchemeSummary& scheme);
std::string envelope_file_name(dr::Kind k);

}  // namespace buckdr::io
