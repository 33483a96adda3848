#ifndef REGLAB_IO_HPP
#define REGLAB_IO_HPP

#include <json.hpp>  // vendored nlohmann/json

#include <cstdio>
#include <fstream>
#include <string>
#include <vector>

#include "reglab/controllers.hpp"
#include "reglab/decay.hpp"
#include "reglab/signals.hpp"
#include "reglab/stability.hpp"
#include "reglab/state_space.hpp"

namespace reglab {

using Json = nlohmann::json;

// Matrices are serialized as nested arrays of [re, im] pairs.
inline Json matrix_to_json(const Mat& m) {
    Json rows = Json::array();
    for (Index i = 0; i < m.rows(); ++i) {
        Json row = Json::array();
        for (Index j = 0; j < m.cols(); ++j)
            row.push_back(Json::array({m(i, j).real(), m(i, j).imag()}));
        rows.push_back(row);
    }
    return rows;
}

inline Mat matrix_from_json(const Json& j, Index rows = -1, Index cols = -1) {
    if (!j.is_array()) throw InvalidArgument("matrix_from_json: expected an array of rows");
    const Index r = static_cast<Index>(j.size());
    const Index c = r > 0 ? static_cast<Index>(j.at(0).size()) : (cols >= 0 ? cols : 0);
    Mat m(r, c);
    for (Index i = 0; i < r; ++i) {
        const auto& row = j.at(static_cast<size_t>(i));
        if (static_cast<Index>(row.size()) != c)
            throw InvalidArgument("matrix_from_json: ragged rows");
        for (Index k = 0; k < c; ++k) {
            const auto& entry = row.at(static_cast<size_t>(k));
            m(i, k) = Complex(entry.at(0).get<double>(), entry.at(1).get<double>());
        }
    }
    if (rows >= 0 && m.rows() != rows) throw InvalidArgument("matrix_from_json: row mismatch");
    if (cols >= 0 && m.cols() != cols) throw InvalidArgument("matrix_from_json: column mismatch");
    return m;
}

inline Json vector_to_json(const Vec& v) {
    Json arr = Json::array();
    for (Index i = 0; i < v.size(); ++i) arr.push_back(Json::array({v(i).real(), v(i).imag()}));
    return arr;
}

inline Vec vector_from_json(const Json& j) {
    Vec v(static_cast<Index>(j.size()));
    for (Index i = 0; i < v.size(); ++i) {
        const auto& entry = j.at(static_cast<size_t>(i));
        v(i) = Complex(entry.at(0).get<double>(), entry.at(1).get<double>());
    }
    return v;
}

inline Json system_to_json(const StateSpaceSystem& sys) {
    Json j;
    j["label"] = sys.label;
    j["n"] = sys.n();
    j["m"] = sys.m();
    j["m_d"] = sys.md();
    j["p"] = sys.p();
    j["A"] = matrix_to_json(sys.A);
    j["B"] = matrix_to_json(sys.B);
    j["B_d"] = sys.Bd ? matrix_to_json(*sys.Bd) : Json();
    j["C"] = matrix_to_json(sys.C);
    j["D"] = matrix_to_json(sys.D);
    return j;
}

inline StateSpaceSystem system_from_json(const Json& j) {
    std::optional<Mat> bd;
    if (j.contains("B_d") && !j.at("B_d").is_null()) bd = matrix_from_json(j.at("B_d"));
    return StateSpaceSystem(matrix_from_json(j.at("A")), matrix_from_json(j.at("B")), bd,
                            matrix_from_json(j.at("C")), matrix_from_json(j.at("D")),
                            j.value("label", std::string()));
}

inline Json controller_to_json(const ControllerRealization& ctrl) {
    Json j;
    j["recipe"] = recipe_name(ctrl.recipe);
    j["n_c"] = ctrl.nc();
    j["p"] = ctrl.p();
    j["A_c"] = matrix_to_json(ctrl.Ac);
    j["B_c"] = matrix_to_json(ctrl.Bc);
    j["C_c"] = matrix_to_json(ctrl.Cc);
    j["D_c1"] = matrix_to_json(ctrl.Dc1);
    j["D_c2"] = matrix_to_json(ctrl.Dc2);
    j["frequencies"] = ctrl.frequencies;
    j["tau"] = ctrl.tau;
    Json modes = Json::array();
    for (const auto& m : ctrl.modes) {
        Json jm;
        jm["omega"] = m.omega;
        jm["offset"] = m.offset;
        jm["dim"] = m.dim;
        jm["gain"] = matrix_to_json(m.gain);
        jm["kernel_basis"] = matrix_to_json(m.kernel_basis);
        jm["stabilized"] = m.stabilized;
        modes.push_back(jm);
    }
    j["modes"] = modes;
    return j;
}

inline ControllerRealization controller_from_json(const Json& j) {
    ControllerRealization ctrl;
    const std::string recipe = j.at("recipe").get<std::string>();
    if (recipe == "fin_dim")
        ctrl.recipe = Recipe::FinDim;
    else if (recipe == "fin_dim_real")
        ctrl.recipe = Recipe::FinDimReal;
    else if (recipe == "transport")
        ctrl.recipe = Recipe::Transport;
    else if (recipe == "diagonal")
        ctrl.recipe = Recipe::Diagonal;
    else
        throw InvalidArgument("controller_from_json: unknown recipe " + recipe);
    ctrl.Ac = matrix_from_json(j.at("A_c"));
    ctrl.Bc = matrix_from_json(j.at("B_c"));
    ctrl.Cc = matrix_from_json(j.at("C_c"));
    ctrl.Dc1 = matrix_from_json(j.at("D_c1"));
    ctrl.Dc2 = matrix_from_json(j.at("D_c2"));
    ctrl.frequencies = j.at("frequencies").get<std::vector<double>>();
    ctrl.tau = j.value("tau", 0.0);
    for (const auto& jm : j.at("modes")) {
        ControllerRealization::Mode m;
        m.omega = jm.at("omega").get<double>();
        m.offset = jm.at("offset").get<Index>();
        m.dim = jm.at("dim").get<Index>();
        m.gain = matrix_from_json(jm.at("gain"));
        m.kernel_basis = matrix_from_json(jm.at("kernel_basis"));
        m.stabilized = jm.value("stabilized", false);
        ctrl.modes.push_back(std::move(m));
    }
    return ctrl;
}

inline Json signal_to_json(const SignalSpec& sig) {
    Json j;
    j["real_valued"] = sig.real_valued();
    Json entries = Json::array();
    for (const auto& e : sig.entries()) {
        Json je;
        je["omega"] = e.omega;
        je["y_ref"] = vector_to_json(e.y_ref);
        je["w_dist"] = vector_to_json(e.w_dist);
        entries.push_back(je);
    }
    j["entries"] = entries;
    return j;
}

inline SignalSpec signal_from_json(const Json& j) {
    std::vector<SignalSpec::Entry> entries;
    for (const auto& je : j.at("entries")) {
        SignalSpec::Entry e;
        e.omega = je.at("omega").get<double>();
        e.y_ref = vector_from_json(je.at("y_ref"));
        e.w_dist = vector_from_json(je.at("w_dist"));
        entries.push_back(std::move(e));
    }
    return SignalSpec(std::move(entries), j.value("real_valued", false));
}

inline Json decay_model_to_json(const DecayModel& model) {
    Json j;
    j["kind"] = decay_kind_name(model.kind);
    j["alpha"] = model.alpha;
    j["rate"] = model.rate;
    j["M_e"] = model.m_e;
    j["c"] = model.c;
    j["fit_residual"] = model.residual;
    j["band"] = Json::array({model.band_lo, model.band_hi});
    if (!model.table.empty()) {
        j["m_table"] = Json::object();
        j["m_table"]["omega"] = model.table.omega;
        j["m_table"]["value"] = model.table.value;
    }
    return j;
}

// CSV: UTF-8, header row, '.' decimal, %.17g values for reproducibility.
inline void write_csv(const std::string& path, const std::vector<std::string>& header,
                      const std::vector<std::vector<double>>& rows) {
    std::ofstream out(path);
    if (!out) throw Error("write_csv: cannot open " + path);
    for (size_t i = 0; i < header.size(); ++i) out << (i ? "," : "") << header[i];
    out << "\n";
    char buf[40];
    for (const auto& row : rows) {
        for (size_t i = 0; i < row.size(); ++i) {
            std::snprintf(buf, sizeof(buf), "%.17g", row[i]);
            out << (i ? "," : "") << buf;
        }
        out << "\n";
    }
}

inline std::vector<std::vector<double>> read_csv(const std::string& path,
                                                 std::vector<std::string>* header = nullptr) {
    std::ifstream in(path);
    if (!in) throw Error("read_csv: cannot open " + path);
    std::string line;
    if (!std::getline(in, line)) throw Error("read_csv: empty file " + path);
    if (header) {
        header->clear();
        size_t pos = 0;
        while (pos != std::string::npos) {
            const size_t comma = line.find(',', pos);
            header->push_back(line.substr(pos, comma == std::string::npos ? comma : comma - pos));
            pos = comma == std::string::npos ? comma : comma + 1;
        }
    }
    std::vector<std::vector<double>> rows;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::vector<double> row;
        size_t pos = 0;
        while (pos != std::string::npos) {
            const size_t comma = line.find(',', pos);
            row.push_back(std::stod(line.substr(pos, comma == std::string::npos ? comma
                                                                                : comma - pos)));
            pos = comma == std::string::npos ? comma : comma + 1;
        }
        rows.push_back(std::move(row));
    }
    return rows;
}

inline void write_scan_csv(const std::string& path, const ResolventScan& scan) {
    std::vector<std::vector<double>> rows;
    for (size_t i = 0; i < scan.size(); ++i)
        rows.push_back({scan.omegas[i], scan.norms[i], double(scan.flags[i])});
    write_csv(path, {"omega", "resolvent_norm", "flag"}, rows);
}

inline void write_json(const std::string& path, const Json& j) {
    std::ofstream out(path);
    if (!out) throw Error("write_json: cannot open " + path);
    out << j.dump(2) << "\n";
}

inline Json read_json(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("read_json: cannot open " + path);
    Json j;
    in >> j;
    return j;
}

}  // namespace reglab

#endif  // REGLAB_IO_HPP
