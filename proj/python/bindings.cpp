#include <complex>
#include <stdexcept>
#include <string>
#include <vector>

#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "sdmc/experiments.hpp"
#include "sdmc/linalg.hpp"

namespace py = pybind11;
using namespace sdmc;

namespace {

using ComplexArray = py::array_t<complex, py::array::c_style | py::array::forcecast>;

ComplexMatrix to_matrix(const ComplexArray& a) {
    if (a.ndim() != 2) throw std::invalid_argument("expected a 2-D array");
    const auto r = static_cast<std::size_t>(a.shape(0));
    const auto c = static_cast<std::size_t>(a.shape(1));
    return ComplexMatrix(r, c, std::vector<complex>(a.data(), a.data() + r * c));
}

py::array_t<double> to_array(const std::vector<double>& v) {
    py::array_t<double> out(static_cast<py::ssize_t>(v.size()));
    std::copy(v.begin(), v.end(), out.mutable_data());
    return out;
}

ComplexArray to_array(const ComplexMatrix& m) {
    ComplexArray out({m.rows(), m.cols()});
    std::copy(m.data(), m.data() + m.size(), out.mutable_data());
    return out;
}

// [time, d, d] means and [time, d, d] standard errors (re, im).
py::tuple stack(const std::vector<MatrixEstimate>& series) {
    if (series.empty()) return py::make_tuple(ComplexArray(), py::array_t<double>(), py::array_t<double>());
    const auto d = series.front().mean.rows();
    const auto n = series.size();
    ComplexArray mean({n, d, d});
    py::array_t<double> se_re({n, d, d}), se_im({n, d, d});
    for (std::size_t k = 0; k < n; ++k) {
        std::copy(series[k].mean.data(), series[k].mean.data() + d * d, mean.mutable_data() + k * d * d);
        std::copy(series[k].se_re.begin(), series[k].se_re.end(), se_re.mutable_data() + k * d * d);
        std::copy(series[k].se_im.begin(), series[k].se_im.end(), se_im.mutable_data() + k * d * d);
    }
    return py::make_tuple(mean, se_re, se_im);
}

py::dict series_dict(const ReducedSeries& s) {
    py::dict out;
    out["times"] = to_array(s.times);
    out["trajectories"] = s.trajectories;
    py::dict one, two;
    for (const auto& [site, v] : s.one_body) one[py::int_(site)] = stack(v);
    for (const auto& [pair, v] : s.two_body) two[py::make_tuple(pair.first, pair.second)] = stack(v);
    out["one_body"] = one;
    out["two_body"] = two;
    if (!s.full.empty()) out["full"] = stack(s.full);
    return out;
}

py::dict table_dict(const Table& t) {
    py::dict out;
    out["columns"] = t.columns;
    out["times"] = to_array(t.times);
    py::array_t<double> rows({t.rows.size(), t.columns.size()});
    for (std::size_t r = 0; r < t.rows.size(); ++r) std::copy(t.rows[r].begin(), t.rows[r].end(), rows.mutable_data() + r * t.columns.size());
    out["rows"] = rows;
    return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Stochastic noise-decoupling simulator";

    py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
    py::register_exception<ValidationError>(m, "ValidationError", PyExc_ValueError);
    py::register_exception<DimensionCapExceeded>(m, "DimensionCapExceeded", PyExc_ValueError);
    py::register_exception<TrajectoryBlowUp>(m, "TrajectoryBlowUp", PyExc_ArithmeticError);

    m.def("preset_names", &preset_names);
    m.def("preset_config_json", [](const std::string& name) { return config_to_json(preset(name)).dump(); });
    m.def("normalize_config_json", [](const std::string& text) {
        const auto cfg = parse_config(nlohmann::json::parse(text));
        validate_config(cfg);
        return config_to_json(cfg).dump();
    });

    py::class_<RunResult>(m, "RunResult")
        .def_property_readonly("manifest_json", [](const RunResult& r) { return r.manifest().dump(); })
        .def_property_readonly("passed", [](const RunResult& r) -> py::object {
            if (!r.compare) return py::none();
            return py::bool_(r.compare->passed);
        })
        .def_readonly("trajectories_used", &RunResult::trajectories_used)
        .def_readonly("discarded", &RunResult::discarded)
        .def_readonly("wall_seconds", &RunResult::wall_seconds)
        .def("series", [](const RunResult& r, const std::string& kind) -> py::object {
            const std::optional<ReducedSeries>* s = kind == "stochastic" ? &r.stochastic
                                                    : kind == "oracle"   ? &r.oracle
                                                    : kind == "analytic" ? &r.analytic
                                                                         : nullptr;
            if (s == nullptr) throw std::invalid_argument("kind must be stochastic, oracle or analytic");
            if (!*s) return py::none();
            return series_dict(**s);
        })
        .def("table", [](const RunResult& r, const std::string& kind) -> py::object {
            if (kind == "compare") return r.compare ? py::object(table_dict(compare_table(*r.compare))) : py::none();
            const std::optional<QuantitySeries>* q = kind == "stochastic" ? &r.stochastic_values
                                                     : kind == "oracle"   ? &r.oracle_values
                                                     : kind == "analytic" ? &r.analytic_values
                                                                          : nullptr;
            if (q == nullptr) throw std::invalid_argument("kind must be stochastic, oracle, analytic or compare");
            if (!*q) return py::none();
            return table_dict(to_table(**q));
        })
        .def("emit", [](const RunResult& r, const std::filesystem::path& dir) { return emit_tables(r, dir); });

    m.def(
        "run_json",
        [](const std::string& text) {
            const auto cfg = parse_config(nlohmann::json::parse(text));
            py::gil_scoped_release release;
            return run(cfg);
        },
        py::arg("config_json"));

    m.def(
        "partial_trace",
        [](const ComplexArray& rho, const std::vector<std::size_t>& dims, const std::vector<std::size_t>& keep) {
            return to_array(partial_trace(to_matrix(rho), dims, keep));
        },
        py::arg("rho"), py::arg("dims"), py::arg("keep"));
    m.def("matrix_exp", [](const ComplexArray& a) { return to_array(matrix_exp(to_matrix(a))); }, py::arg("a"));
}
