#include <doctest.h>

#include <Eigen/QR>
#include <cmath>
#include <set>

#include "csen/dataset.hpp"
#include "csen/dictionary.hpp"
#include "csen/error.hpp"
#include "csen/linalg.hpp"
#include "support.hpp"

using namespace csen;
using csen::testing::gaussian;
using csen::testing::max_abs;

namespace {

ProjectionMatrix identity_projection(Index d) {
  ProjectionMatrix P;
  P.basis = Matrix::Identity(d, d);
  P.mean = Vector::Zero(d);
  P.eigenvalues = Vector::Ones(d);
  return P;
}

Dictionary toy_dictionary(const Matrix& D, int classes, double lambda) {
  Dictionary dict;
  dict.layout = build_layout(classes, static_cast<int>(D.cols()) / classes);
  dict.D = D;
  dict.B = ridge_denoiser(D, lambda);
  dict.lambda = lambda;
  for (int c = 0; c < classes; ++c) dict.class_names.push_back("c" + std::to_string(c));
  return dict;
}

}  // namespace

TEST_CASE("layout for 4 classes of 625 atoms") {
  const auto L = build_layout(4, 625);
  CHECK(L.block_rows() == 25);
  CHECK(L.block_cols() == 25);
  CHECK(L.grid_rows() == 2);
  CHECK(L.grid_cols() == 2);
  CHECK(L.plane_rows() == 50);
  CHECK(L.plane_cols() == 50);
}

TEST_CASE("layout for 2 classes of 4 atoms") {
  const auto L = build_layout(2, 4);
  CHECK(L.block_rows() == 2);
  CHECK(L.block_cols() == 2);
  CHECK(L.grid_rows() == 1);
  CHECK(L.grid_cols() == 2);
  CHECK(L.plane_rows() == 2);
  CHECK(L.plane_cols() == 4);
}

TEST_CASE("layout for 3 classes of 6 atoms has a dead block") {
  const auto L = build_layout(3, 6);
  CHECK(L.block_rows() == 3);
  CHECK(L.block_cols() == 2);
  CHECK(L.grid_rows() == 2);
  CHECK(L.grid_cols() == 2);
  CHECK(L.plane_rows() == 6);
  CHECK(L.plane_cols() == 4);
  int live = 0;
  for (int r = 0; r < L.plane_rows(); ++r)
    for (int c = 0; c < L.plane_cols(); ++c) live += L.atom_at(r, c) >= 0;
  CHECK(live == 18);
  const auto dead = L.block_origin(3);
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 2; ++c) CHECK(L.atom_at(dead.row + r, dead.col + c) == -1);
}

TEST_CASE("layout rejects degenerate sizes") {
  CHECK_THROWS_AS(build_layout(1, 4), Error);
  CHECK_THROWS_AS(build_layout(3, 0), Error);
}

TEST_CASE("layout is a bijection with contiguous class blocks") {
  for (int classes = 2; classes <= 10; ++classes) {
    for (int apc = 1; apc <= 100; ++apc) {
      const auto L = build_layout(classes, apc);
      CHECK(L.plane_rows() == L.grid_rows() * L.block_rows());
      CHECK(L.plane_cols() == L.grid_cols() * L.block_cols());
      CHECK(L.block_rows() * L.block_cols() >= apc);
      CHECK(L.grid_rows() * L.grid_cols() >= classes);
      std::set<std::pair<int, int>> seen;
      bool ok = true;
      for (int a = 0; a < L.atom_count(); ++a) {
        const auto cell = L.cell_of(a);
        ok &= seen.insert({cell.row, cell.col}).second;
        ok &= L.atom_at(cell.row, cell.col) == a;
        const auto origin = L.block_origin(a / apc);
        ok &= cell.row >= origin.row && cell.row < origin.row + L.block_rows();
        ok &= cell.col >= origin.col && cell.col < origin.col + L.block_cols();
        ok &= L.class_at(cell.row, cell.col) == a / apc;
      }
      int live = 0;
      for (int r = 0; r < L.plane_rows(); ++r)
        for (int c = 0; c < L.plane_cols(); ++c) live += L.atom_at(r, c) >= 0;
      ok &= live == L.atom_count();
      CHECK_MESSAGE(ok, "classes=", classes, " atoms_per_class=", apc);
    }
  }
}

TEST_CASE("plane reshape and flatten round trip") {
  std::mt19937_64 rng(3);
  for (auto [c, apc] : {std::pair{4, 625}, std::pair{3, 6}, std::pair{5, 7}}) {
    const auto L = build_layout(c, apc);
    const Vector x = gaussian(L.atom_count(), rng);
    const auto plane = plane_reshape(x, L);
    CHECK(plane.rows == L.plane_rows());
    CHECK(plane.cols == L.plane_cols());
    CHECK(plane_flatten(plane, L) == x);
    for (int r = 0; r < plane.rows; ++r)
      for (int col = 0; col < plane.cols; ++col) {
        const int a = L.atom_at(r, col);
        CHECK(plane.at(r, col) == (a < 0 ? 0.0 : x(a)));
      }
  }
  const auto L = build_layout(2, 4);
  CHECK_THROWS_AS(plane_reshape(Vector::Zero(7), L), Error);
  ProxyPlane wrong;
  wrong.rows = 3;
  wrong.cols = 3;
  wrong.cells.assign(9, 0.0);
  CHECK_THROWS_AS(plane_flatten(wrong, L), Error);
}

TEST_CASE("dictionary from two single atoms under identity projection") {
  FeatureDataset data;
  data.features.resize(2, 3);
  data.features << 2, 0, 0, 0, 0, 5;
  data.labels = {0, 1};
  data.class_names = {"a", "b"};
  const auto dict = build_dictionary(data, 1, identity_projection(3), 0.1, 0);
  CHECK(dict.D.rows() == 3);
  CHECK(dict.D.cols() == 2);
  CHECK(max_abs(dict.D.colwise().norm().array() - 1.0) < 1e-12);
  CHECK(dict.D(0, 0) == doctest::Approx(1.0));
  CHECK(dict.D(2, 1) == doctest::Approx(1.0));
}

TEST_CASE("dictionary atoms are grouped, normalized and deterministic") {
  const auto data = generate_synthetic(3, 40, 10, 4.0, 5);
  const auto P = pca_fit(standardize_fit(data.features).apply_rows(data.features), 6);
  const auto a = build_dictionary(data, 9, P, 1e-3, 77);
  const auto b = build_dictionary(data, 9, P, 1e-3, 77);
  const auto c = build_dictionary(data, 9, P, 1e-3, 78);
  CHECK(a.source_rows == b.source_rows);
  CHECK(a.D == b.D);
  CHECK(a.source_rows != c.source_rows);
  CHECK(a.D.rows() == 6);
  CHECK(a.D.cols() == 27);
  CHECK(max_abs(a.phi.colwise().norm().array() - 1.0) < 1e-9);
  CHECK(max_abs(a.D.colwise().norm().array() - 1.0) < 1e-9);
  CHECK(max_abs(a.B - ridge_denoiser(a.D, 1e-3)) < 1e-12);
  std::set<std::size_t> distinct(a.source_rows.begin(), a.source_rows.end());
  CHECK(distinct.size() == a.source_rows.size());
  for (std::size_t i = 0; i < a.source_rows.size(); ++i)
    CHECK(data.labels[a.source_rows[i]] == static_cast<int>(i) / 9);
  const auto [first, count] = a.class_columns(1);
  CHECK(first == 9);
  CHECK(count == 9);
}

TEST_CASE("dictionary needs enough samples per class") {
  const auto data = generate_synthetic(2, 5, 4, 1.0, 1);
  try {
    build_dictionary(data, 6, identity_projection(4), 0.1, 0);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::data);
    CHECK(std::string(e.what()).find("class0") != std::string::npos);
  }
}

TEST_CASE("paper-scale dictionary shapes") {
  const auto data = generate_synthetic(4, 640, 1024, 3.0, 9);
  const auto P = pca_fit(standardize_fit(data.features).apply_rows(data.features),
                         reduced_dimension(1024, 0.5));
  const auto dict = build_dictionary(data, 625, P, 2e-12, 1);
  CHECK(dict.D.rows() == 512);
  CHECK(dict.D.cols() == 2500);
  CHECK(dict.B.rows() == 2500);
  CHECK(dict.B.cols() == 512);
  CHECK(dict.layout.plane_rows() == 50);
  CHECK(dict.layout.plane_cols() == 50);
  CHECK(std::isfinite(dict.B.sum()));
}

TEST_CASE("ridge proxy of an atom peaks at that atom") {
  std::mt19937_64 rng(21);
  const auto dict = toy_dictionary(normalize_columns(gaussian(8, 12, rng)), 3, 1e-9);
  for (int j = 0; j < 12; ++j) {
    const Vector y = dict.D.col(j);
    const auto plane = proxy(dict, y, ProxyMode::ridge);
    const Vector flat = plane_flatten(plane, dict.layout);
    Index arg;
    flat.cwiseAbs().maxCoeff(&arg);
    CHECK(arg == j);
  }
}

TEST_CASE("proxy of zero is zero and proxy is linear") {
  std::mt19937_64 rng(22);
  const auto dict = toy_dictionary(normalize_columns(gaussian(6, 16, rng)), 4, 1e-2);
  for (double v : proxy(dict, Vector::Zero(6)).cells) CHECK(v == 0.0);
  const Vector y1 = gaussian(6, rng), y2 = gaussian(6, rng);
  const double a = 1.7, b = -0.4;
  const Vector lhs = proxy_coefficients(dict, a * y1 + b * y2, ProxyMode::ridge);
  const Vector rhs = a * proxy_coefficients(dict, y1, ProxyMode::ridge) +
                     b * proxy_coefficients(dict, y2, ProxyMode::ridge);
  CHECK(max_abs(lhs - rhs) < 1e-9);
  CHECK_THROWS_AS(proxy(dict, Vector::Zero(5)), Error);
}

TEST_CASE("correlation proxy on an orthonormal dictionary recovers coefficients") {
  std::mt19937_64 rng(23);
  const Matrix Q = gaussian(8, 8, rng).householderQr().householderQ();
  const auto dict = toy_dictionary(Q, 2, 1e-3);
  const Vector x = gaussian(8, rng);
  const Vector got = proxy_coefficients(dict, Q * x, ProxyMode::correlation);
  CHECK(max_abs(got - x) < 1e-12);
}
