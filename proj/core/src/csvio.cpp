#include "mcflow/csvio.hpp"

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "json.hpp"

namespace mcflow {

namespace {

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write '" + path + "'");
  return out;
}

std::vector<double> split_numbers(const std::string& line, const std::string& where) {
  std::vector<double> out;
  std::istringstream in(line);
  std::string item;
  while (std::getline(in, item, ',')) {
    char* end = nullptr;
    double x = std::strtod(item.c_str(), &end);
    if (end == item.c_str())
      throw IoError(where + ": not a number: '" + item + "'");
    out.push_back(x);
  }
  return out;
}

bool numeric_row(const std::string& line) {
  char* end = nullptr;
  std::strtod(line.c_str(), &end);
  return end != line.c_str();
}

nlohmann::ordered_json matrix_json(const Eigen::MatrixXd& M) {
  auto rows = nlohmann::ordered_json::array();
  for (long i = 0; i < M.rows(); ++i) {
    auto r = nlohmann::ordered_json::array();
    for (long j = 0; j < M.cols(); ++j) r.push_back(M(i, j));
    rows.push_back(r);
  }
  return rows;
}

nlohmann::ordered_json vector_json(const Eigen::VectorXd& v) {
  auto r = nlohmann::ordered_json::array();
  for (long i = 0; i < v.size(); ++i) r.push_back(v(i));
  return r;
}

}  // namespace

std::string fmt17(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

void write_monitor_csv(const std::string& path, const std::vector<MonitorRow>& rows) {
  auto out = open_out(path);
  out << "step,s,dt,sup_v,min_g_eig,sup_H2,sup_A2,area,K_min,res_uflow,res_H2,res_area\n";
  for (const auto& r : rows) {
    out << r.step << ',' << fmt17(r.s) << ',' << fmt17(r.dt) << ','
        << fmt17(r.sup_v) << ',' << fmt17(r.min_g_eig) << ','
        << fmt17(r.sup_H2) << ',' << fmt17(r.sup_A2) << ',' << fmt17(r.area)
        << ',' << fmt17(r.K_min) << ',' << fmt17(r.res_uflow) << ','
        << fmt17(r.res_H2) << ',' << fmt17(r.res_area) << '\n';
  }
}

void write_snapshot_csv(const std::string& path, const ImmersedPatch& patch,
                        double s) {
  auto out = open_out(path);
  const GridTopology& topo = patch.topo;
  out << "# ambient: " << patch.space->name() << '\n';
  out << "# s: " << fmt17(s) << '\n';
  out << "# shape:";
  for (int k = 0; k < topo.rank(); ++k) out << ' ' << topo.axis(k).size;
  out << '\n';
  out << "# h:";
  for (int k = 0; k < topo.rank(); ++k) out << ' ' << fmt17(topo.axis(k).h);
  out << '\n';

  GeometryOptions gopts;
  gopts.require_spacelike = false;
  GeometryField geom = derive_geometry(patch, gopts);

  int d = patch.space->dim(), n = topo.rank();
  out << "node";
  for (int a = 0; a < d; ++a) out << ",x" << a;
  for (int i = 0; i < n; ++i) out << ",g_eig_" << i;
  out << ",v,H2,A2\n";
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig;
  for (long p = 0; p < topo.nodes(); ++p) {
    const NodeGeometry& nd = geom.node[p];
    out << p;
    for (int a = 0; a < d; ++a) out << ',' << fmt17(patch.f(a, p));
    eig.compute(nd.g, Eigen::EigenvaluesOnly);
    for (int i = 0; i < n; ++i) out << ',' << fmt17(eig.eigenvalues()(i));
    out << ',' << fmt17(nd.v) << ',' << fmt17(nd.H2) << ',' << fmt17(nd.A2) << '\n';
  }
}

void write_radial_monitor_csv(const std::string& path,
                              const std::vector<RadialRow>& rows) {
  auto out = open_out(path);
  out << "step,t,dt,sup_dev,min_H,min_Hprime\n";
  for (const auto& r : rows) {
    out << r.step << ',' << fmt17(r.t) << ',' << fmt17(r.dt) << ','
        << fmt17(r.sup_dev) << ',' << fmt17(r.min_H) << ','
        << fmt17(r.min_Hprime) << '\n';
  }
}

void write_radial_profile_csv(const std::string& path, const RadialProfile& prof) {
  auto out = open_out(path);
  out << "R,H\n";
  for (long k = 0; k < prof.R.size(); ++k)
    out << fmt17(prof.R(k)) << ',' << fmt17(prof.H(k)) << '\n';
}

RadialProfile read_radial_profile_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read '" + path + "'");
  std::vector<double> R, H;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line[0] == '#') continue;
    if (!numeric_row(line)) continue;  // header row
    auto nums = split_numbers(line, path + ":" + std::to_string(lineno));
    if (nums.size() != 2)
      throw IoError(path + ":" + std::to_string(lineno) +
                    ": expected two columns, got " + std::to_string(nums.size()));
    R.push_back(nums[0]);
    H.push_back(nums[1]);
  }
  long N = static_cast<long>(R.size());
  if (N < 3) throw IoError(path + ": need at least 3 profile nodes, got " +
                           std::to_string(N));
  RadialProfile prof;
  prof.R = Eigen::Map<Eigen::VectorXd>(R.data(), N);
  prof.H = Eigen::Map<Eigen::VectorXd>(H.data(), N);
  prof.h = (prof.R(N - 1) - prof.R(0)) / static_cast<double>(N - 1);
  if (!(prof.h > 0)) throw IoError(path + ": R must be ascending");
  for (long k = 0; k + 1 < N; ++k) {
    double dk = prof.R(k + 1) - prof.R(k);
    if (std::abs(dk - prof.h) > 1e-9 * std::max(1.0, std::abs(prof.h)))
      throw IoError(path + ": non-uniform R spacing at row " + std::to_string(k + 1));
  }
  prof.bc_lo = prof.H(0);
  prof.bc_hi = prof.H(N - 1);
  return prof;
}

Eigen::MatrixXd read_matrix_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read '" + path + "'");
  std::vector<std::vector<double>> rows;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line[0] == '#') continue;
    if (rows.empty() && !numeric_row(line)) continue;  // header row
    rows.push_back(split_numbers(line, path + ":" + std::to_string(lineno)));
    if (rows.back().size() != rows.front().size())
      throw IoError(path + ":" + std::to_string(lineno) + ": ragged row");
  }
  if (rows.empty()) throw IoError(path + ": no numeric rows");
  Eigen::MatrixXd M(static_cast<long>(rows.size()),
                    static_cast<long>(rows.front().size()));
  for (long i = 0; i < M.rows(); ++i)
    for (long j = 0; j < M.cols(); ++j) M(i, j) = rows[i][j];
  return M;
}

void write_matrix_csv(const std::string& path, const Eigen::MatrixXd& M) {
  auto out = open_out(path);
  for (long i = 0; i < M.rows(); ++i) {
    for (long j = 0; j < M.cols(); ++j) {
      if (j) out << ',';
      out << fmt17(M(i, j));
    }
    out << '\n';
  }
}

std::string normal_form_json(const NormalForm& nf) {
  nlohmann::ordered_json j;
  j["signature"] = {{"n", nf.sig.n}, {"m", nf.sig.m}};
  j["mirrored"] = nf.mirrored();
  j["D1"] = vector_json(nf.D1);
  j["D2"] = vector_json(nf.D2);
  j["D3"] = vector_json(nf.D3);
  j["D4"] = vector_json(nf.D4);
  j["A_block"] = matrix_json(nf.A_block);
  auto sc = nlohmann::ordered_json::array();
  for (long i = 0; i < nf.sign_choices.size(); ++i) sc.push_back(nf.sign_choices(i));
  j["sign_choices"] = sc;
  j["R_tan"] = matrix_json(nf.R_tan);
  j["R_nor"] = matrix_json(nf.R_nor);
  j["S_tan"] = matrix_json(nf.S_tan);
  j["S_nor"] = matrix_json(nf.S_nor);
  j["canonical"] = matrix_json(nf.canonical().assembled());
  return j.dump(2) + "\n";
}

}  // namespace mcflow
