#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "convexdom/domination.hpp"

namespace py = pybind11;
using namespace convexdom;

namespace {

GridSpec make_grid(int d, int root_level, int cell_level) {
  return GridSpec{d, cell_level, DyadicCube{d, root_level, {0, 0}}};
}

Kernel kernel_by_name(const std::string& type, int d, int level, std::uint64_t seed) {
  if (type == "delta") return delta_kernel(d, level);
  if (type == "smooth_bump") return smooth_bump_kernel(d, level);
  if (type == "random") return random_kernel(d, level, 1, 1, seed);
  throw std::invalid_argument("unknown kernel type: " + type);
}

WeightKind kind_by_name(const std::string& kind) {
  if (kind == "identity") return WeightKind::Identity;
  if (kind == "scalar_power") return WeightKind::ScalarPower;
  if (kind == "rotated_diagonal") return WeightKind::RotatedDiagonal;
  if (kind == "random_log_spd") return WeightKind::RandomLogSpd;
  throw std::invalid_argument("unknown weight kind: " + kind);
}

}  // namespace

PYBIND11_MODULE(_convexdom, m) {
  m.doc() = "convex-body sparse domination laboratory";

  py::class_<DyadicCube>(m, "DyadicCube")
      .def(py::init([](int d, int level, std::int64_t ax, std::int64_t ay) {
             return DyadicCube{d, level, {ax, ay}};
           }),
           py::arg("d"), py::arg("level"), py::arg("ax") = 0, py::arg("ay") = 0)
      .def_readonly("d", &DyadicCube::d)
      .def_readonly("level", &DyadicCube::level)
      .def("side", &DyadicCube::side)
      .def("volume", &DyadicCube::volume)
      .def("__repr__", &DyadicCube::str);

  py::class_<GridSpec>(m, "GridSpec")
      .def(py::init(&make_grid), py::arg("d"), py::arg("root_level"), py::arg("cell_level"))
      .def_readonly("d", &GridSpec::d)
      .def_readonly("cell_level", &GridSpec::cell_level)
      .def_readonly("root", &GridSpec::root)
      .def("cell_count", &GridSpec::cell_count)
      .def("cell_volume", &GridSpec::cell_volume);

  py::enum_<NormTag>(m, "NormTag")
      .value("Euclidean", NormTag::Euclidean)
      .value("Sum", NormTag::Sum)
      .value("Max", NormTag::Max);

  py::class_<GridFunction>(m, "GridFunction")
      .def(py::init<const GridSpec&, int, int, NormTag>(), py::arg("grid"), py::arg("n") = 1,
           py::arg("m") = 1, py::arg("norm") = NormTag::Euclidean)
      .def_readonly("n", &GridFunction::n)
      .def_readonly("m", &GridFunction::m)
      .def_readonly("grid", &GridFunction::grid)
      .def_property(
          "values", [](const GridFunction& f) { return f.values; },
          [](GridFunction& f, std::vector<double> v) {
            if (v.size() != f.values.size()) throw std::invalid_argument("size mismatch");
            f.values = std::move(v);
          })
      .def("component", &GridFunction::component)
      .def("max_abs", &GridFunction::max_abs);

  m.def("lp_norm", &lp_norm, py::arg("f"), py::arg("p"));
  m.def("pairing", &pairing);
  m.def(
      "maximal_function",
      [](const GridFunction& f, double p, bool dyadic) {
        return maximal_function(f, p, dyadic ? MaximalMode::Dyadic : MaximalMode::AllGridCubes);
      },
      py::arg("f"), py::arg("p"), py::arg("dyadic") = true);

  m.def(
      "body_dot",
      [](const GridFunction& f, const GridFunction& g, double p, double qprime,
         std::uint64_t seed) {
        CellMask all(f.grid, true);
        BodyOracle F(f, all, p), G(g, all, qprime);
        auto res = body_dot(F, G, BodyDotMethod::Auto, seed);
        return py::make_tuple(res.value, res.method, res.certified);
      },
      py::arg("f"), py::arg("g"), py::arg("p"), py::arg("qprime"), py::arg("seed") = 7);

  m.def(
      "reducing_transform",
      [](const GridFunction& f, double p) {
        CellMask all(f.grid, true);
        auto map = reducing_transform(f, all, p);
        return py::make_tuple(map.R, map.rank);
      },
      py::arg("f"), py::arg("p"));

  py::class_<MatrixWeight>(m, "MatrixWeight")
      .def_readonly("n", &MatrixWeight::n)
      .def("at", [](const MatrixWeight& W, std::int64_t c) { return W.at(c); });

  m.def(
      "weight_generator",
      [](const GridSpec& grid, int n, const std::string& kind, double alpha, double beta,
         double r, std::uint64_t seed) {
        WeightParams params;
        params.alpha = alpha;
        params.beta = beta;
        params.r = r;
        return weight_generator(grid, n, kind_by_name(kind), params, seed);
      },
      py::arg("grid"), py::arg("n"), py::arg("kind"), py::arg("alpha") = 0, py::arg("beta") = 0,
      py::arg("r") = 2, py::arg("seed") = 1);
  m.def("a_r_constant", [](const MatrixWeight& W, double r) { return a_r_constant(W, r); });
  m.def("rh_ts_constant",
        [](const MatrixWeight& W, double t, double s) { return rh_ts_constant(W, t, s); });
  m.def("duality_ratio", [](const MatrixWeight& W, double r) { return duality_report(W, r).ratio; });

  py::class_<BRSFamily>(m, "Family")
      .def_readonly("n1", &BRSFamily::n1)
      .def_readonly("n2", &BRSFamily::n2);

  m.def(
      "make_family",
      [](const std::string& kernel_type, int d, int level, int n1, int n2, std::uint64_t seed) {
        return make_family(kernel_by_name(kernel_type, d, level, seed), n1, n2);
      },
      py::arg("kernel_type"), py::arg("d"), py::arg("level"), py::arg("n1"), py::arg("n2"),
      py::arg("seed") = 1);
  m.def(
      "certify",
      [](BRSFamily& fam, const GridSpec& grid, double p, double q, double kappa,
         std::uint64_t seed) {
        auto rec = certify(fam, grid, p, q, kappa, seed);
        py::dict out;
        out["a_circ"] = rec.a_circ;
        out["a_circ_tag"] = const_tag_name(rec.a_circ_tag);
        out["b"] = rec.b;
        out["a_p"] = rec.a_p;
        out["a_q"] = rec.a_q;
        out["cost"] = rec.cost();
        return out;
      },
      py::arg("family"), py::arg("grid"), py::arg("p") = 2, py::arg("q") = 2,
      py::arg("kappa") = 1, py::arg("seed") = 11);
  m.def("family_apply", [](const BRSFamily& fam, const GridFunction& f) { return apply(fam, f); });

  m.def(
      "multiscale_dominate",
      [](const BRSFamily& fam, const GridFunction& f, const GridFunction& g, double p, double q,
         double gamma, std::uint64_t seed) {
        DominationOptions opts;
        opts.gamma = gamma;
        opts.seed = seed;
        auto cert = multiscale_dominate(fam, f, g, f.grid.root, p, q, opts);
        py::dict out;
        out["lhs"] = cert.lhs;
        out["rhs"] = cert.rhs;
        out["ratio"] = cert.ratio;
        out["budget"] = cert.constant_budget;
        out["passed"] = cert.passed;
        out["cubes"] = cert.family.entries.size();
        out["min_witness_ratio"] = cert.min_witness_ratio;
        return out;
      },
      py::arg("family"), py::arg("f"), py::arg("g"), py::arg("p") = 2, py::arg("q") = 2,
      py::arg("gamma") = 0.5, py::arg("seed") = 7);

  m.def(
      "decompose_multiplier",
      [](int levels, int k_min, int k_max, int ell_max, std::vector<double> symbol,
         std::uint64_t seed) {
        MultiplierSpec spec;
        spec.levels = levels;
        spec.k_min = k_min;
        spec.k_max = k_max;
        spec.ell_max = ell_max;
        spec.symbol = std::move(symbol);
        auto rep = decompose_multiplier(spec, seed);
        py::dict out;
        out["telescoping_error"] = rep.telescoping_error;
        out["partition_residual"] = rep.partition_residual;
        out["reconstruction_error"] = rep.reconstruction_error;
        out["a_circ_ell"] = rep.a_circ_ell;
        out["a_ell"] = rep.a_ell;
        out["b_circ_sum"] = rep.b_circ_sum;
        out["b_sum"] = rep.b_sum;
        out["ok"] = rep.ok;
        return out;
      },
      py::arg("levels") = 7, py::arg("k_min") = 2, py::arg("k_max") = 4, py::arg("ell_max") = 6,
      py::arg("symbol") = std::vector<double>{}, py::arg("seed") = 21);

  m.def("com_numbers_min", [](double q, double r, int gridpoints) {
    auto rep = com_numbers_check(q, r, gridpoints);
    return py::make_tuple(rep.min_constant, rep.ok);
  }, py::arg("q"), py::arg("r"), py::arg("gridpoints") = 100);
  m.def("c_qr", &c_qr);
}
