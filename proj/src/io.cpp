#include "rwot/io.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <vector>

namespace rwot {

std::string format_double(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

namespace {

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::kIoError, "cannot open '" + path + "' for reading");
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(ErrorCode::kIoError, "cannot open '" + path + "' for writing");
  return out;
}

void finish(std::ofstream& out, const std::string& path) {
  out.flush();
  if (!out) fail(ErrorCode::kIoError, "write to '" + path + "' failed");
}

std::vector<std::string> split_lines(const std::string& text) {
  std::vector<std::string> lines;
  std::string cur;
  for (char ch : text) {
    if (ch == '\n') {
      if (!cur.empty() && cur.back() == '\r') cur.pop_back();
      lines.push_back(cur);
      cur.clear();
    } else {
      cur += ch;
    }
  }
  if (!cur.empty()) lines.push_back(cur);
  return lines;
}

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char ch : line) {
    if (ch == ',') {
      out.push_back(cur);
      cur.clear();
    } else {
      cur += ch;
    }
  }
  out.push_back(cur);
  return out;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t");
  return s.substr(b, e - b + 1);
}

double parse_number(const std::string& field, size_t line) {
  const std::string f = trim(field);
  double v = 0.0;
  const char* end = f.data() + f.size();
  const auto [ptr, ec] = std::from_chars(f.data(), end, v);
  if (f.empty() || ec != std::errc() || ptr != end)
    fail(ErrorCode::kParseError,
         "line " + std::to_string(line) + ": '" + f + "' is not a number");
  return v;
}

}  // namespace

DiscreteDistribution parse_distribution(const std::string& text) {
  const std::vector<std::string> lines = split_lines(text);
  if (lines.empty()) fail(ErrorCode::kParseError, "line 1: missing header");
  const std::vector<std::string> header = split_fields(lines[0]);
  if (header.size() < 2 || trim(header[0]) != "w")
    fail(ErrorCode::kParseError, "line 1: header must be w,x1,...,xd");
  for (size_t k = 1; k < header.size(); ++k)
    if (trim(header[k]) != "x" + std::to_string(k))
      fail(ErrorCode::kParseError, "line 1: expected column x" + std::to_string(k));
  const size_t d = header.size() - 1;

  std::vector<double> w, x;
  for (size_t i = 1; i < lines.size(); ++i) {
    if (trim(lines[i]).empty()) continue;
    const std::vector<std::string> f = split_fields(lines[i]);
    if (f.size() != d + 1)
      fail(ErrorCode::kParseError, "line " + std::to_string(i + 1) + ": expected " +
                                       std::to_string(d + 1) + " fields, found " +
                                       std::to_string(f.size()));
    w.push_back(parse_number(f[0], i + 1));
    for (size_t k = 1; k <= d; ++k) x.push_back(parse_number(f[k], i + 1));
  }
  if (w.empty()) fail(ErrorCode::kParseError, "line 2: no atoms");
  const auto n = static_cast<Eigen::Index>(w.size());
  PointMatrix pts = Eigen::Map<const PointMatrix>(x.data(), n, static_cast<Eigen::Index>(d));
  return DiscreteDistribution(pts, Eigen::Map<const Vector>(w.data(), n));
}

DiscreteDistribution load_distribution(const std::string& path) {
  try {
    return parse_distribution(read_file(path));
  } catch (const Error& e) {
    if (e.code() == ErrorCode::kIoError) throw;
    fail(e.code(), path + ": " + e.what());
  }
}

void save_distribution(const std::string& path, const DiscreteDistribution& dist) {
  std::ofstream out = open_out(path);
  out << "w";
  for (Eigen::Index k = 0; k < dist.dim(); ++k) out << ",x" << k + 1;
  out << "\n";
  for (Eigen::Index i = 0; i < dist.size(); ++i) {
    out << format_double(dist.weight(i));
    for (Eigen::Index k = 0; k < dist.dim(); ++k) out << "," << format_double(dist.points()(i, k));
    out << "\n";
  }
  finish(out, path);
}

Matrix load_matrix(const std::string& path) {
  const std::vector<std::string> lines = split_lines(read_file(path));
  std::vector<std::vector<double>> rows;
  for (size_t i = 0; i < lines.size(); ++i) {
    if (trim(lines[i]).empty()) continue;
    std::vector<double> row;
    for (const auto& f : split_fields(lines[i])) row.push_back(parse_number(f, i + 1));
    if (!rows.empty() && row.size() != rows.front().size())
      fail(ErrorCode::kParseError, path + ": line " + std::to_string(i + 1) + ": ragged row");
    rows.push_back(std::move(row));
  }
  if (rows.empty()) fail(ErrorCode::kParseError, path + ": empty matrix");
  Matrix m(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows[0].size()));
  for (size_t i = 0; i < rows.size(); ++i)
    for (size_t j = 0; j < rows[i].size(); ++j) m(i, j) = rows[i][j];
  return m;
}

void save_plan(const std::string& path, const TransportPlan& plan) {
  std::ofstream out = open_out(path);
  out << "i,j,mass\n";
  for (Eigen::Index i = 0; i < plan.mass.rows(); ++i)
    for (Eigen::Index j = 0; j < plan.mass.cols(); ++j)
      if (plan.mass(i, j) > 0.0) out << i << "," << j << "," << format_double(plan.mass(i, j)) << "\n";
  finish(out, path);
}

void save_verify_report(const std::string& path, const VerifyReport& report) {
  std::ofstream out = open_out(path);
  out << "check,instance_id,lhs,rhs,residual,pass\n";
  for (const auto& r : report.rows)
    out << r.check << "," << r.instance_id << "," << format_double(r.lhs) << ","
        << format_double(r.rhs) << "," << format_double(r.residual) << ","
        << (r.pass ? "true" : "false") << "\n";
  finish(out, path);
}

void save_rate_report(const std::string& path, const RateReport& report) {
  std::ofstream out = open_out(path);
  out << "n,mean,stderr,trials,slope_overall\n";
  for (size_t i = 0; i < report.n_grid.size(); ++i)
    out << report.n_grid[i] << "," << format_double(report.mean_divergence[i]) << ","
        << format_double(report.stderr_divergence[i]) << "," << report.trials << ","
        << format_double(report.fitted_slope) << "\n";
  finish(out, path);
}

void save_tail_curve(const std::string& path, const TailCurve& curve) {
  std::ofstream out = open_out(path);
  out << "eps,prob,n,trials\n";
  for (size_t i = 0; i < curve.eps.size(); ++i)
    out << format_double(curve.eps[i]) << "," << format_double(curve.prob[i]) << "," << curve.n
        << "," << curve.trials << "\n";
  finish(out, path);
}

void save_metrics(const std::string& path, const MetricsTimeline& timeline) {
  std::ofstream out = open_out(path);
  out << "iter,d_loss,g_loss,w_min,w_max,grad_norm_w,grad_norm_theta,mode_coverage\n";
  for (const auto& r : timeline.records)
    out << r.iter << "," << format_double(r.d_loss) << "," << format_double(r.g_loss) << ","
        << format_double(r.w_min) << "," << format_double(r.w_max) << ","
        << format_double(r.grad_norm_w) << "," << format_double(r.grad_norm_theta) << ","
        << format_double(r.mode_coverage) << "\n";
  finish(out, path);
}

void save_samples(const std::string& path, const PointMatrix& samples) {
  std::ofstream out = open_out(path);
  out << "x1,x2\n";
  for (Eigen::Index i = 0; i < samples.rows(); ++i)
    out << format_double(samples(i, 0)) << "," << format_double(samples(i, 1)) << "\n";
  finish(out, path);
}

}  // namespace rwot
