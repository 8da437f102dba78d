#pragma once

#include <charconv>
#include <string>

#include <json.hpp>

#include "fracmat/convergence.hpp"
#include "fracmat/fraccalc.hpp"
#include "fracmat/upper_triangular.hpp"

namespace fracmat {

/// Shortest decimal rendering that round-trips the double; used for CSV so
/// that identical runs emit identical bytes.
inline std::string format_double(double v) {
    char buf[40];
    auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

inline nlohmann::json to_json(const UpperTriangularMatrix& m) {
    return nlohmann::json{{"n", m.size()}, {"entries", m.packed()}};
}

inline nlohmann::json result_metadata(const FracResult& r, const std::string& method) {
    return nlohmann::json{
        {"schema", 1},
        {"alpha", r.alpha},
        {"method", method},
        {"side", r.side == Side::Left ? "left" : "right"},
        {"n", r.grid.n()},
        {"h", r.grid.h()},
        {"a", r.grid.left()},
        {"x", r.grid.right()},
        {"value_re", r.value.real()},
        {"value_im", r.value.imag()},
    };
}

/// CSV of the per-node vector, ascending node index; right-sided results get
/// separate real and imaginary columns.
inline std::string result_csv(const FracResult& r) {
    std::string out;
    const bool complex_out = r.side == Side::Right;
    out += complex_out ? "node,x_k,value_re,value_im\n" : "node,x_k,value\n";
    const std::size_t n = r.node_values.size();
    for (std::size_t i = 0; i < n; ++i) {
        // Row order is matrix order; emit ascending node index instead.
        const std::size_t row = r.side == Side::Left ? n - 1 - i : i;
        out += std::to_string(r.node_index_for_row(row));
        out += ',';
        out += format_double(r.point_for_row(row));
        out += ',';
        out += format_double(r.node_values[row].real());
        if (complex_out) {
            out += ',';
            out += format_double(r.node_values[row].imag());
        }
        out += '\n';
    }
    return out;
}

inline nlohmann::json to_json(const RateReport& r) {
    return nlohmann::json{
        {"schema", 1},
        {"label", r.label},
        {"grid_sizes", r.grid_sizes},
        {"h", r.hs},
        {"errors", r.errors},
        {"slope", r.slope},
        {"residual", r.residual},
        {"predicted_exponent", r.predicted_exponent},
        {"regime", r.regime == GrowthRegime::Bounded       ? "bounded"
                   : r.regime == GrowthRegime::Polynomial  ? "polynomial"
                                                           : "negative-power"},
        {"passed", r.passed},
        {"monotone_errors", r.monotone_errors},
    };
}

inline std::string rate_report_csv(const RateReport& r) {
    std::string out = "n,h,error\n";
    for (std::size_t i = 0; i < r.grid_sizes.size(); ++i) {
        out += std::to_string(r.grid_sizes[i]);
        out += ',';
        out += format_double(r.hs[i]);
        out += ',';
        out += format_double(r.errors[i]);
        out += '\n';
    }
    return out;
}

} // namespace fracmat
