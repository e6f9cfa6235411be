#pragma once

// CSV tables and JSON summaries for the experiment results. Every writer
// prints doubles with round-trip precision, so identical inputs give
// byte-identical files.

#include <iosfwd>
#include <string>
#include <vector>

#include "json.hpp"
#include "ptkk/experiments.hpp"

namespace ptkk::report {

using nlohmann::json;

std::string format_double(double x);

json to_json(cplx z);
json to_json(const DimerParams& p);
json to_json(const PoleData& p);
json to_json(const ScalingFit& f);
json to_json(const PoleFitResult& f);
json to_json(const BodeSum& b);

// omega,re,im,hilbert,standard_residual,correction,corrected_residual
void write_kk_csv(std::ostream& out, const SampledResponse& s, const KKResult& k);
// gamma,re_z1,im_z1,re_z2,im_z2,...
void write_trajectory_csv(std::ostream& out, const Trajectory& t);
// gamma,gamma_ex,winding,boundary,contour_winding (blank when not checked)
void write_phase_csv(std::ostream& out, const PhaseMap& m);
// gamma,distance,l2_standard,l2_corrected,reduction_factor,n_uhp
void write_scaling_csv(std::ostream& out, const std::vector<ScalingPoint>& table);
// gamma,index,re,im (every UHP pole at every scan point)
void write_uhp_poles_csv(std::ostream& out, const std::vector<ScalingPoint>& table);
// index,re,im,residue_re,residue_im,half_plane,degenerate
void write_poles_csv(std::ostream& out, const std::vector<PoleData>& poles);

}  // namespace ptkk::report
