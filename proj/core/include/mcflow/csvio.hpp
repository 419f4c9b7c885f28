#pragma once

#include <Eigen/Dense>
#include <stdexcept>
#include <string>
#include <vector>

#include "mcflow/flow.hpp"
#include "mcflow/indefinite.hpp"
#include "mcflow/patch.hpp"
#include "mcflow/radial.hpp"

namespace mcflow {

struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// All numeric series go through "%.17g" so single-threaded reruns are
/// byte-identical and doubles round-trip exactly.
std::string fmt17(double x);

/// Monitor series, header
///   step,s,dt,sup_v,min_g_eig,sup_H2,sup_A2,area,K_min,res_uflow,res_H2,res_area
/// one row per accepted step; an empty series writes the header only.
void write_monitor_csv(const std::string& path, const std::vector<MonitorRow>& rows);

/// Patch snapshot: '#'-prefixed structured header (grid shape, spacings,
/// ambient name, flow time), then per node
///   node, x0..x{d-1}, g_eig_0..g_eig_{n-1}, v, H2, A2
/// with the induced-metric eigenvalues sorted ascending.
void write_snapshot_csv(const std::string& path, const ImmersedPatch& patch,
                        double s);

/// Radial monitor series: step,t,dt,sup_dev,min_H,min_Hprime.
void write_radial_monitor_csv(const std::string& path,
                              const std::vector<RadialRow>& rows);

/// Two-column profile files: header "R,H", one row per node.
void write_radial_profile_csv(const std::string& path, const RadialProfile& prof);

/// Reads a two-column profile back; accepts an optional header row and
/// '#' comments, requires at least 3 nodes and uniform ascending R.
RadialProfile read_radial_profile_csv(const std::string& path);

/// Dense numeric matrix, one CSV row per matrix row.
Eigen::MatrixXd read_matrix_csv(const std::string& path);
void write_matrix_csv(const std::string& path, const Eigen::MatrixXd& M);

/// Normal form rendered as JSON (block data, diagonals, frames).
std::string normal_form_json(const NormalForm& nf);

}  // namespace mcflow
