/*
 * Copyright 2026 The hamcert Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

#include "hamcert/bounds.hpp"
#include "hamcert/dataset.hpp"
#include "hamcert/network.hpp"
#include "hamcert/structure.hpp"
#include "hamcert/training.hpp"

#include <json.hpp>

#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace hamcert::io {

using json = nlohmann::json;

// ---------------------------------------------------------------------------
// Generic file helpers
// ---------------------------------------------------------------------------

inline void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open for writing: " + path);
    out << content;
    if (!out) throw IoError("write failed: " + path);
}

inline std::string read_text_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open for reading: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline void write_json_file(const std::string& path, const json& j) {
    write_text_file(path, j.dump(2) + "\n");
}

inline json read_json_file(const std::string& path) {
    try {
        return json::parse(read_text_file(path));
    } catch (const json::parse_error& e) {
        throw IoError("malformed JSON in " + path + ": " + e.what());
    }
}

// ---------------------------------------------------------------------------
// Networks
// ---------------------------------------------------------------------------

inline json matrix_to_json_row_major(const Mat& m) {
    json a = json::array();
    for (long r = 0; r < m.rows(); ++r)
        for (long c = 0; c < m.cols(); ++c) a.push_back(m(r, c));
    return a;
}

inline Mat matrix_from_json_row_major(const json& a, long rows, long cols) {
    require(static_cast<long>(a.size()) == rows * cols, "model file: weight count mismatch");
    Mat m(rows, cols);
    long i = 0;
    for (long r = 0; r < rows; ++r)
        for (long c = 0; c < cols; ++c) m(r, c) = a[i++].get<double>();
    return m;
}

inline json vector_to_json(const Vec& v) {
    json a = json::array();
    for (long i = 0; i < v.size(); ++i) a.push_back(v(i));
    return a;
}

inline Vec vector_from_json(const json& a) {
    Vec v(static_cast<long>(a.size()));
    for (long i = 0; i < v.size(); ++i) v(i) = a[i].get<double>();
    return v;
}

inline json layer_to_json(const nn::LinearLayer& l, const nn::Activation& act) {
    json j;
    j["kind"] = nn::to_string(l.kind());
    if (l.kind() == nn::LayerKind::Dense) {
        j["in_dim"] = l.in_dim();
        j["out_dim"] = l.out_dim();
    } else {
        j["in_channels"] = l.in_channels();
        j["out_channels"] = l.out_channels();
        j["kernel"] = l.kernel_size();
        j["n_sites"] = l.n_sites();
    }
    j["weights"] = matrix_to_json_row_major(l.weights());
    j["bias"] = vector_to_json(l.bias());
    j["activation"] = nn::to_string(act.kind);
    return j;
}

inline std::pair<nn::LinearLayer, nn::Activation> layer_from_json(const json& j) {
    const auto kind = nn::layer_kind_from_string(j.at("kind").get<std::string>());
    const auto act = nn::make_activation(
        nn::act_kind_from_string(j.at("activation").get<std::string>()));
    if (kind == nn::LayerKind::Dense) {
        const long out = j.at("out_dim").get<long>();
        const long in = j.at("in_dim").get<long>();
        Mat w = matrix_from_json_row_major(j.at("weights"), out, in);
        Vec b = vector_from_json(j.at("bias"));
        return {nn::LinearLayer::dense(std::move(w), std::move(b)), act};
    }
    const int in_ch = j.at("in_channels").get<int>();
    const int out_ch = j.at("out_channels").get<int>();
    const int kernel = j.at("kernel").get<int>();
    const int n_sites = j.at("n_sites").get<int>();
    Mat w = matrix_from_json_row_major(j.at("weights"), out_ch,
                                       static_cast<long>(kernel) * in_ch);
    Vec b = vector_from_json(j.at("bias"));
    return {nn::LinearLayer::circular_conv1d(in_ch, out_ch, kernel, n_sites, std::move(w),
                                             std::move(b)),
            act};
}

namespace detail {
inline json chain_to_json(const std::vector<nn::LinearLayer>& layers,
                          const std::vector<nn::Activation>& acts) {
    json arr = json::array();
    for (size_t k = 0; k < layers.size(); ++k) {
        const nn::Activation act =
            k + 1 < layers.size() ? acts[k] : nn::Activation::identity();
        arr.push_back(layer_to_json(layers[k], act));
    }
    return arr;
}

inline std::pair<std::vector<nn::LinearLayer>, std::vector<nn::Activation>> chain_from_json(
    const json& arr) {
    std::vector<nn::LinearLayer> layers;
    std::vector<nn::Activation> acts;
    require(arr.is_array() && arr.size() >= 2, "model file: need at least two layers");
    for (size_t k = 0; k < arr.size(); ++k) {
        auto [layer, act] = layer_from_json(arr[k]);
        layers.push_back(std::move(layer));
        if (k + 1 < arr.size())
            acts.push_back(act);
        else
            require(act.kind == nn::ActKind::Identity,
                    "model file: the last layer carries no activation");
    }
    return {std::move(layers), std::move(acts)};
}
}  // namespace detail

inline json to_json(const nn::ScalarNet& net) {
    json j;
    j["schema_version"] = kSchemaVersion;
    j["input_dim"] = net.input_dim();
    j["layers"] = detail::chain_to_json(net.layers(), net.activations());
    j["readout"] = nn::to_string(net.readout());
    j["seed"] = net.seed();
    return j;
}

inline nn::ScalarNet scalar_net_from_json(const json& j) {
    auto [layers, acts] = detail::chain_from_json(j.at("layers"));
    nn::ScalarNet net(std::move(layers), std::move(acts),
                      nn::readout_from_string(j.at("readout").get<std::string>()),
                      j.value("seed", std::uint64_t{0}));
    require(net.input_dim() == j.at("input_dim").get<int>(),
            "model file: input_dim does not match layer dimensions");
    return net;
}

inline json to_json(const nn::VectorNet& net) {
    json j;
    j["schema_version"] = kSchemaVersion;
    j["input_dim"] = net.input_dim();
    j["output_dim"] = net.output_dim();
    j["layers"] = detail::chain_to_json(net.layers(), net.activations());
    j["readout"] = "vector_output";
    j["seed"] = net.seed();
    return j;
}

inline nn::VectorNet vector_net_from_json(const json& j) {
    auto [layers, acts] = detail::chain_from_json(j.at("layers"));
    nn::VectorNet net(std::move(layers), std::move(acts), j.value("seed", std::uint64_t{0}));
    require(net.input_dim() == j.at("input_dim").get<int>(),
            "model file: input_dim does not match layer dimensions");
    return net;
}

// ---------------------------------------------------------------------------
// Structure matrices
// ---------------------------------------------------------------------------

inline json to_json(const dynamics::StructureMatrix& s) {
    json j;
    j["kind"] = dynamics::to_string(s.kind());
    j["character"] = dynamics::to_string(s.character());
    j["dim"] = s.dim();
    switch (s.kind()) {
        case dynamics::StructureKind::CanonicalSymplectic:
            j["half_dim"] = s.dim() / 2;
            break;
        case dynamics::StructureKind::CentralDifference:
        case dynamics::StructureKind::SecondDifference:
            j["dx"] = s.dx();
            break;
        case dynamics::StructureKind::Custom:
            j["matrix"] = matrix_to_json_row_major(s.matrix());
            break;
    }
    return j;
}

inline dynamics::StructureMatrix structure_from_json(const json& j) {
    const std::string kind = j.at("kind").get<std::string>();
    const int dim = j.at("dim").get<int>();
    if (kind == "canonical_symplectic")
        return dynamics::StructureMatrix::canonical_symplectic(j.at("half_dim").get<int>());
    if (kind == "central_difference")
        return dynamics::StructureMatrix::central_difference(dim, j.at("dx").get<double>());
    if (kind == "second_difference")
        return dynamics::StructureMatrix::second_difference(dim, j.at("dx").get<double>());
    if (kind == "custom") {
        Mat m = matrix_from_json_row_major(j.at("matrix"), dim, dim);
        const std::string ch = j.at("character").get<std::string>();
        dynamics::StructureCharacter c = dynamics::StructureCharacter::General;
        if (ch == "skew") c = dynamics::StructureCharacter::Skew;
        if (ch == "negative_semidefinite") c = dynamics::StructureCharacter::NegativeSemidefinite;
        return dynamics::StructureMatrix::custom(std::move(m), c);
    }
    throw ConfigError("unknown structure kind in file: " + kind);
}

// ---------------------------------------------------------------------------
// Train reports and bound reports
// ---------------------------------------------------------------------------

inline json to_json(const training::TrainReport& r, const json& resolved_config) {
    json j;
    j["schema_version"] = kSchemaVersion;
    j["final_train_loss"] = r.final_train_loss;
    j["max_batch_loss"] = r.max_batch_loss;
    j["iterations"] = r.loss_history.size();
    j["skipped_samples"] = r.skipped_samples;
    j["wall_time_seconds"] = r.wall_time_seconds;
    j["loss_history"] = r.loss_history;
    j["config"] = resolved_config;
    return j;
}

inline json to_json(const nn::NormProfile& p) {
    json j;
    j["layer_norms"] = p.layer_norms;
    j["activation_lipschitz"] = p.act_lipschitz;
    j["activation_deriv_bound"] = p.act_deriv_bound;
    j["activation_deriv_lipschitz"] = p.act_deriv_lipschitz;
    j["input_radius"] = p.input_radius;
    j["loss_lipschitz"] = p.loss_lipschitz;
    j["sample_count"] = p.sample_count;
    return j;
}

inline json to_json(const bounds::BoundReport& r, const json& resolved_config) {
    json j;
    j["schema_version"] = kSchemaVersion;
    j["covering_constant_K"] = r.covering_k;
    j["covering_bound"] = {{"form", "(K/eps + 1)^n, reported as n*ln(K/eps + 1)"},
                           {"log_at_eps_c_loss", r.log_covering_at_c_loss}};
    j["rademacher"] = {{"alpha", r.rademacher.alpha},
                       {"beta", r.rademacher.beta},
                       {"value", r.rademacher.value}};
    j["generalization_bound"] = r.generalization;
    if (r.linf.applicable) {
        j["linf_hamiltonian_bound"] = r.linf.value;
    } else {
        j["linf_hamiltonian_bound"] = nullptr;
        j["linf_not_applicable_reason"] = r.linf.reason;
    }
    if (r.kam.guaranteed) {
        j["kam_delta"] = r.kam.delta;
        j["kam_statement"] = r.kam.statement;
    } else {
        j["kam_delta"] = nullptr;
        j["kam_no_guarantee_reason"] = r.kam.statement;
    }
    j["assumptions_log"] = r.assumptions_log;
    j["inputs"] = {{"norm_profile", to_json(r.inputs.profile)},
                   {"n", r.inputs.n},
                   {"c_loss", r.inputs.c_loss},
                   {"delta", r.inputs.delta},
                   {"l_train", r.inputs.l_train},
                   {"p", r.inputs.p},
                   {"half_dim_M", r.inputs.half_dim_m},
                   {"c_sobolev", r.inputs.c_sobolev},
                   {"inf_density", r.inputs.inf_density},
                   {"kam_constants",
                    {{"eps0", r.inputs.kam.eps0},
                     {"c1", r.inputs.kam.c1},
                     {"c2", r.inputs.kam.c2},
                     {"c3", r.inputs.kam.c3}}}};
    j["config"] = resolved_config;
    return j;
}

inline std::string bound_report_table(const bounds::BoundReport& r) {
    std::ostringstream os;
    auto row = [&](const std::string& k, const std::string& v) {
        os << "  " << k;
        for (size_t i = k.size(); i < 34; ++i) os << ' ';
        os << v << "\n";
    };
    os << "certified bound chain\n";
    row("covering constant K", format_g17(r.covering_k));
    row("log covering at eps = c_loss", format_g17(r.log_covering_at_c_loss));
    row("rademacher alpha", format_g17(r.rademacher.alpha));
    row("rademacher beta", format_g17(r.rademacher.beta));
    row("rademacher bound R_n", format_g17(r.rademacher.value));
    row("generalization bound", format_g17(r.generalization));
    row("L_inf Hamiltonian bound",
        r.linf.applicable ? format_g17(r.linf.value) : "not applicable: " + r.linf.reason);
    row("KAM delta", r.kam.guaranteed ? format_g17(r.kam.delta) : r.kam.statement);
    if (r.kam.guaranteed) row("KAM statement", r.kam.statement);
    os << "  assumptions:\n";
    for (const auto& a : r.assumptions_log) os << "    - " << a << "\n";
    return os.str();
}

// ---------------------------------------------------------------------------
// CSV files
// ---------------------------------------------------------------------------

/// Dataset CSV: header `t,u_0..u_{N-1},dudt_0..dudt_{N-1}`, one row per
/// sample, 17 significant digits everywhere.
inline void write_dataset_csv(const std::string& path,
                              const integrators::GradientDataset& ds) {
    require(ds.size() > 0, "write_dataset_csv: empty dataset");
    const int n = ds.dim();
    std::ostringstream os;
    os << "t";
    for (int i = 0; i < n; ++i) os << ",u_" << i;
    for (int i = 0; i < n; ++i) os << ",dudt_" << i;
    os << "\n";
    for (const auto& s : ds.samples) {
        os << format_g17(s.t);
        for (int i = 0; i < n; ++i) os << "," << format_g17(s.u(i));
        for (int i = 0; i < n; ++i) os << "," << format_g17(s.dudt(i));
        os << "\n";
    }
    write_text_file(path, os.str());
}

inline json dataset_meta_to_json(const integrators::GradientDataset& ds,
                                 const json& resolved_config) {
    json j;
    j["schema_version"] = kSchemaVersion;
    j["system"] = ds.provenance.system;
    j["system_params"] = ds.provenance.system_params;
    j["n_traj"] = ds.provenance.n_traj;
    j["t0"] = ds.provenance.t0;
    j["t1"] = ds.provenance.t1;
    j["n_points"] = ds.provenance.n_points;
    j["sampler"] = ds.provenance.sampler;
    j["seed"] = ds.provenance.seed;
    j["rtol"] = ds.provenance.rtol;
    j["atol"] = ds.provenance.atol;
    j["input_radius"] = ds.input_radius;
    j["sample_count"] = ds.size();
    j["config"] = resolved_config;
    return j;
}

namespace detail {
inline std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    for (char ch : line) {
        if (ch == ',') {
            out.push_back(cur);
            cur.clear();
        } else if (ch != '\r') {
            cur.push_back(ch);
        }
    }
    out.push_back(cur);
    return out;
}
}  // namespace detail

inline integrators::GradientDataset read_dataset_csv(const std::string& csv_path,
                                                     const std::string& meta_path) {
    integrators::GradientDataset ds;
    const json meta = read_json_file(meta_path);
    ds.provenance.system = meta.value("system", std::string{});
    if (meta.contains("system_params"))
        for (auto it = meta["system_params"].begin(); it != meta["system_params"].end(); ++it)
            ds.provenance.system_params[it.key()] = it.value().get<double>();
    ds.provenance.n_traj = meta.value("n_traj", 0);
    ds.provenance.t0 = meta.value("t0", 0.0);
    ds.provenance.t1 = meta.value("t1", 0.0);
    ds.provenance.n_points = meta.value("n_points", 0);
    ds.provenance.sampler = meta.value("sampler", std::string{});
    ds.provenance.seed = meta.value("seed", std::uint64_t{0});
    ds.provenance.rtol = meta.value("rtol", 1e-8);
    ds.provenance.atol = meta.value("atol", 1e-10);
    ds.input_radius = meta.value("input_radius", 0.0);

    std::istringstream in(read_text_file(csv_path));
    std::string line;
    require(static_cast<bool>(std::getline(in, line)), "dataset CSV is empty: " + csv_path);
    const auto header = detail::split_csv_line(line);
    require(header.size() >= 3 && (header.size() - 1) % 2 == 0,
            "dataset CSV header malformed: " + csv_path);
    const int n = static_cast<int>((header.size() - 1) / 2);
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const auto cells = detail::split_csv_line(line);
        require(static_cast<int>(cells.size()) == 1 + 2 * n,
                "dataset CSV row width mismatch: " + csv_path);
        integrators::GradientSample s;
        s.t = std::stod(cells[0]);
        s.u.resize(n);
        s.dudt.resize(n);
        for (int i = 0; i < n; ++i) s.u(i) = std::stod(cells[1 + i]);
        for (int i = 0; i < n; ++i) s.dudt(i) = std::stod(cells[1 + n + i]);
        ds.samples.push_back(std::move(s));
    }
    require(!ds.samples.empty(), "dataset CSV has no rows: " + csv_path);
    return ds;
}

/// Trajectory CSV: `# key = value` preamble (schema version, resolved
/// config), then `t,u_0..u_{N-1}` rows.
inline void write_trajectory_csv(const std::string& path, const integrators::Trajectory& traj,
                                 const json& resolved_config) {
    require(!traj.states.empty(), "write_trajectory_csv: empty trajectory");
    const int n = traj.dim();
    std::ostringstream os;
    os << "# schema_version = " << kSchemaVersion << "\n";
    os << "# config = " << resolved_config.dump() << "\n";
    os << "t";
    for (int i = 0; i < n; ++i) os << ",u_" << i;
    os << "\n";
    for (size_t k = 0; k < traj.times.size(); ++k) {
        os << format_g17(traj.times[k]);
        for (int i = 0; i < n; ++i) os << "," << format_g17(traj.states[k](i));
        os << "\n";
    }
    write_text_file(path, os.str());
}

inline integrators::Trajectory read_trajectory_csv(const std::string& path) {
    std::istringstream in(read_text_file(path));
    integrators::Trajectory traj;
    std::string line;
    bool header_seen = false;
    int n = 0;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        const auto cells = detail::split_csv_line(line);
        if (!header_seen) {
            require(cells.size() >= 2 && cells[0] == "t",
                    "trajectory CSV header malformed: " + path);
            n = static_cast<int>(cells.size()) - 1;
            header_seen = true;
            continue;
        }
        require(static_cast<int>(cells.size()) == n + 1,
                "trajectory CSV row width mismatch: " + path);
        traj.times.push_back(std::stod(cells[0]));
        Vec u(n);
        for (int i = 0; i < n; ++i) u(i) = std::stod(cells[1 + i]);
        traj.states.push_back(std::move(u));
    }
    require(!traj.states.empty(), "trajectory CSV has no rows: " + path);
    return traj;
}

/// Generic named-column series CSV (diagnostics output).
inline void write_series_csv(const std::string& path,
                             const std::vector<std::string>& columns,
                             const std::vector<std::vector<double>>& data,
                             const json& resolved_config) {
    require(!columns.empty() && columns.size() == data.size(),
            "write_series_csv: column/data mismatch");
    const size_t rows = data.front().size();
    for (const auto& col : data)
        require(col.size() == rows, "write_series_csv: ragged columns");
    std::ostringstream os;
    os << "# schema_version = " << kSchemaVersion << "\n";
    os << "# config = " << resolved_config.dump() << "\n";
    for (size_t c = 0; c < columns.size(); ++c)
        os << columns[c] << (c + 1 < columns.size() ? "," : "");
    os << "\n";
    for (size_t r = 0; r < rows; ++r) {
        for (size_t c = 0; c < columns.size(); ++c)
            os << format_g17(data[c][r]) << (c + 1 < columns.size() ? "," : "");
        os << "\n";
    }
    write_text_file(path, os.str());
}

}  // namespace hamcert::io
