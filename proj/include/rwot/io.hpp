#pragma once

#include <string>

#include "rwot/gan.hpp"
#include "rwot/theory.hpp"
#include "rwot/transport.hpp"

namespace rwot {

// Shortest round-trip text for a double (17 significant digits).
std::string format_double(double x);

// CSV with header `w,x1,...,xd` and one atom per row. Throws kIoError if the
// file cannot be opened, kParseError naming the line, and kWeightError for
// invalid weights.
DiscreteDistribution load_distribution(const std::string& path);
DiscreteDistribution parse_distribution(const std::string& text);
void save_distribution(const std::string& path, const DiscreteDistribution& dist);

// Rows of comma-separated doubles, all of the same length.
Matrix load_matrix(const std::string& path);

// `i,j,mass` for every positive entry, 0-based.
void save_plan(const std::string& path, const TransportPlan& plan);

// check,instance_id,lhs,rhs,residual,pass
void save_verify_report(const std::string& path, const VerifyReport& report);
// n,mean,stderr,trials,slope_overall
void save_rate_report(const std::string& path, const RateReport& report);
// eps,prob,n,trials
void save_tail_curve(const std::string& path, const TailCurve& curve);
// iter,d_loss,g_loss,w_min,w_max,grad_norm_w,grad_norm_theta,mode_coverage
void save_metrics(const std::string& path, const MetricsTimeline& timeline);
// x1,x2
void save_samples(const std::string& path, const PointMatrix& samples);

}  // namespace rwot
