#include <cmath>
#include <vector>

#include "doctest.h"
#include "mcflow/indefinite.hpp"
#include "mcflow/sampling.hpp"
#include "mcflow/tensornorm.hpp"

using namespace mcflow;

namespace {

PseudoOrthogonalMatrix identity_element(Signature sig) {
  PseudoOrthogonalMatrix M;
  M.sig = sig;
  M.X = Eigen::MatrixXd::Identity(sig.n, sig.n);
  M.V = Eigen::MatrixXd::Identity(sig.m, sig.m);
  M.W = Eigen::MatrixXd::Zero(sig.n, sig.m);
  M.U = Eigen::MatrixXd::Zero(sig.m, sig.n);
  return M;
}

double block_distance(const PseudoOrthogonalMatrix& a,
                      const PseudoOrthogonalMatrix& b) {
  return std::max({(a.X - b.X).cwiseAbs().maxCoeff(),
                   (a.W - b.W).cwiseAbs().maxCoeff(),
                   (a.U - b.U).cwiseAbs().maxCoeff(),
                   (a.V - b.V).cwiseAbs().maxCoeff()});
}

}  // namespace

TEST_CASE("group membership: identity and 1+1 boost") {
  CHECK(onm_check(identity_element({3, 2})));

  PseudoOrthogonalMatrix M;
  M.sig = {1, 1};
  M.X = Eigen::MatrixXd::Constant(1, 1, 1.25);
  M.V = Eigen::MatrixXd::Constant(1, 1, 1.25);
  M.W = Eigen::MatrixXd::Constant(1, 1, 0.75);
  M.U = Eigen::MatrixXd::Constant(1, 1, 0.75);
  CHECK(onm_check(M));
  CHECK(onm_deviation(M) == doctest::Approx(0.0).epsilon(1e-14));

  M.V(0, 0) = 1.0;  // breaks the V identity by -0.5625
  CHECK_FALSE(onm_check(M));
  CHECK(onm_deviation(M) == doctest::Approx(0.5625));
}

TEST_CASE("assembled matrix satisfies M^T eta M = eta exactly when blocks do") {
  Rng rng(7);
  Signature sig{3, 2};
  auto M = random_onm(sig, rng);
  Eigen::MatrixXd eta = Eigen::MatrixXd::Zero(5, 5);
  eta.topLeftCorner(3, 3).setIdentity();
  eta.bottomRightCorner(2, 2) = -Eigen::MatrixXd::Identity(2, 2);
  Eigen::MatrixXd A = M.assembled();
  CHECK((A.transpose() * eta * A - eta).cwiseAbs().maxCoeff() < 1e-12);
  auto back = PseudoOrthogonalMatrix::from_assembled(A, sig);
  CHECK(block_distance(M, back) == 0.0);
}

TEST_CASE("normal form: identity element") {
  auto nf = onm_normal_form(identity_element({3, 2}));
  CHECK((nf.D1 - Eigen::VectorXd::Ones(2)).cwiseAbs().maxCoeff() < 1e-12);
  CHECK((nf.D2 - Eigen::VectorXd::Ones(2)).cwiseAbs().maxCoeff() < 1e-12);
  CHECK(nf.D3.cwiseAbs().maxCoeff() < 1e-12);
  CHECK(nf.D4.cwiseAbs().maxCoeff() < 1e-12);
  auto back = reconstruct(nf);
  CHECK(block_distance(identity_element({3, 2}), back) < 1e-12);
}

TEST_CASE("normal form: single boost in 1+1") {
  auto M = boost({1, 1}, 0, 0, std::log(2.0));  // cosh = 1.25, sinh = 0.75
  auto nf = onm_normal_form(M);
  CHECK(nf.D1(0) == doctest::Approx(1.25).epsilon(1e-14));
  CHECK(nf.D2(0) == doctest::Approx(1.25).epsilon(1e-14));
  CHECK(nf.D3(0) == doctest::Approx(0.75).epsilon(1e-12));
  CHECK(nf.D4(0) == doctest::Approx(0.75).epsilon(1e-12));
  CHECK(std::abs(std::abs(nf.A_block(0, 0)) - 1.0) < 1e-12);
  CHECK(block_distance(M, reconstruct(nf)) < 1e-12);
}

TEST_CASE("normal form: commuting boosts in 3+2 recover the boost angles") {
  Signature sig{3, 2};
  auto M = onm_product(boost(sig, 0, 0, 0.3), boost(sig, 1, 1, 0.7));
  auto nf = onm_normal_form(M);
  // D1 sorted descending.
  CHECK(nf.D1(0) == doctest::Approx(std::cosh(0.7)).epsilon(1e-12));
  CHECK(nf.D1(1) == doctest::Approx(std::cosh(0.3)).epsilon(1e-12));
  CHECK(nf.D2(0) == doctest::Approx(std::cosh(0.7)).epsilon(1e-12));
  CHECK(nf.D2(1) == doctest::Approx(std::cosh(0.3)).epsilon(1e-12));
  CHECK(nf.D3(0) == doctest::Approx(std::sinh(0.7)).epsilon(1e-12));
  CHECK(nf.D3(1) == doctest::Approx(std::sinh(0.3)).epsilon(1e-12));
  CHECK(block_distance(M, reconstruct(nf)) < 1e-11);
}

TEST_CASE("normal form: random elements round-trip across signatures") {
  std::vector<Signature> sigs = {{1, 1}, {2, 1}, {3, 2}, {5, 3},
                                 {1, 2}, {2, 3}, {1, 3}, {4, 4}};
  Rng rng(20240817);
  for (auto sig : sigs) {
    for (int rep = 0; rep < 25; ++rep) {
      int n_boosts = rep % 4;  // includes pure rotations (degenerate diagonals)
      auto M = random_onm(sig, rng, n_boosts);
      auto nf = onm_normal_form(M);
      const int k = std::min(sig.n, sig.m);

      CHECK(block_distance(M, reconstruct(nf)) < 1e-10);
      CHECK((nf.D1.array() >= 1.0 - 1e-12).all());
      CHECK((nf.D2.array() >= 1.0 - 1e-12).all());
      CHECK((nf.D1.array().square() - nf.D3.array().square() - 1.0)
                .abs()
                .maxCoeff() < 1e-12);
      CHECK((nf.D2.array().square() - nf.D4.array().square() - 1.0)
                .abs()
                .maxCoeff() < 1e-12);
      CHECK(std::abs(nf.D1.squaredNorm() - nf.D2.squaredNorm()) < 1e-10);

      auto ortho = [](const Eigen::MatrixXd& Q) {
        return (Q.transpose() * Q -
                Eigen::MatrixXd::Identity(Q.cols(), Q.cols()))
            .cwiseAbs()
            .maxCoeff();
      };
      CHECK(ortho(nf.R_tan) < 1e-12);
      CHECK(ortho(nf.R_nor) < 1e-12);
      CHECK(ortho(nf.S_tan) < 1e-12);
      CHECK(ortho(nf.S_nor) < 1e-12);
      CHECK(ortho(nf.A_block) < 1e-8);
      CHECK(nf.sign_choices.size() == k);
      CHECK(onm_check(nf.canonical(), 1e-9));
    }
  }
}

TEST_CASE("normal form rejects non-members") {
  PseudoOrthogonalMatrix M = identity_element({2, 1});
  M.W(0, 0) = 0.3;  // W without matching U/V breaks membership
  CHECK_THROWS_AS(onm_normal_form(M), std::invalid_argument);
}

TEST_CASE("tilt: closed forms and lower bound") {
  CHECK(tilt(Eigen::MatrixXd::Identity(2, 2)) ==
        doctest::Approx(std::sqrt(2.0)).epsilon(1e-14));
  CHECK(tilt(Eigen::MatrixXd::Constant(1, 1, 1.25)) == doctest::Approx(1.25));

  Rng rng(99);
  for (int rep = 0; rep < 200; ++rep) {
    Signature sig{1 + static_cast<int>(rng() % 4),
                  1 + static_cast<int>(rng() % 3)};
    auto M = random_onm(sig, rng, static_cast<int>(rng() % 3));
    CHECK(tilt(M.V) >= std::sqrt(static_cast<double>(sig.m)) - 1e-12);
  }

  // Equality case: v = sqrt(m) forces W = 0 and U = 0.
  auto Mid = identity_element({3, 2});
  CHECK(tilt(Mid.V) == doctest::Approx(std::sqrt(2.0)));
}

TEST_CASE("frame norm: metric tensor in an orthonormal frame") {
  Signature sig{2, 1};
  FrameTensor B = FrameTensor::zeros(2, 3);
  // Components of G itself against the frame: diag(1, 1, -1).
  B.at({0, 0}) = 1.0;
  B.at({1, 1}) = 1.0;
  B.at({2, 2}) = -1.0;
  CHECK(tensor_norm_squared(B, sig) == doctest::Approx(3.0));

  FrameTensor v = FrameTensor::zeros(1, 3);
  v.at({0}) = 3.0;
  v.at({2}) = 4.0;
  CHECK(tensor_norm_squared(v, sig) == doctest::Approx(25.0));

  CHECK(tensor_norm_squared_k({B, v}, sig) == doctest::Approx(28.0));
}

TEST_CASE("frame bounds: boosted frame example") {
  Signature sig{1, 1};
  auto M = boost(sig, 0, 0, std::log(2.0));
  FramePair fp;
  fp.sig = sig;
  fp.G = Eigen::MatrixXd::Zero(2, 2);
  fp.G(0, 0) = 1.0;
  fp.G(1, 1) = -1.0;
  fp.bg = Eigen::MatrixXd::Identity(2, 2);
  fp.adapted = adapted_frame_from_onm(M);

  CHECK(frame_orthonormality_deviation(fp) < 1e-12);
  auto b = frame_norm_bounds(fp);
  CHECK(b.tau_norm_sq(0) == doctest::Approx(2.125));  // cosh^2 + sinh^2
  CHECK(b.v == doctest::Approx(1.25));
  CHECK(b.tau_bound_holds);  // 2.125 <= 1*3*1.5625 = 4.6875
  CHECK(b.nu_bound_holds);
  CHECK(b.V_block(0, 0) == doctest::Approx(1.25));
}

TEST_CASE("frame bounds: no violations over random boosted frames") {
  Rng rng(4242);
  std::vector<Signature> sigs = {{1, 1}, {2, 1}, {3, 2}, {4, 3}, {2, 2}};
  for (auto sig : sigs) {
    for (int rep = 0; rep < 400; ++rep) {
      auto fp = random_flat_frame_pair(sig, rng, 1 + rep % 3);
      CHECK(frame_orthonormality_deviation(fp) < 1e-10);
      auto b = frame_norm_bounds(fp);
      CHECK(b.tau_bound_holds);
      CHECK(b.nu_bound_holds);
      CHECK(b.v >= std::sqrt(static_cast<double>(sig.m)) - 1e-12);
    }
  }
}
