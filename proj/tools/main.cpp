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

#include "hamcert/bounds.hpp"
#include "hamcert/config.hpp"
#include "hamcert/dataset.hpp"
#include "hamcert/diagnostics.hpp"
#include "hamcert/model_io.hpp"
#include "hamcert/svg.hpp"
#include "hamcert/training.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>

namespace fs = std::filesystem;
using namespace hamcert;
using cli::Config;
using io::json;

namespace {

// ---------------------------------------------------------------------------
// Config plumbing
// ---------------------------------------------------------------------------

struct CommonArgs {
    std::string config_path;
    std::string out_dir = ".";
    std::vector<std::string> overrides;  // key=value
    std::optional<long> seed;
    bool print_config = false;
};

void add_common(CLI::App* cmd, CommonArgs& args) {
    cmd->add_option("--config", args.config_path, "config file (key = value lines)");
    cmd->add_option("--out-dir", args.out_dir, "output directory");
    cmd->add_option("--set", args.overrides, "override a config key, e.g. --set train.lr=1e-4")
        ->type_name("KEY=VALUE");
    cmd->add_option("--seed", args.seed, "override the run seed");
    cmd->add_flag("--print-config", args.print_config, "print resolved defaults and exit");
}

Config load_config(const CommonArgs& args) {
    Config cfg = args.config_path.empty() ? Config{} : Config::from_file(args.config_path);
    for (const auto& kv : args.overrides) {
        const auto eq = kv.find('=');
        require(eq != std::string::npos, "--set expects key=value, got: " + kv);
        cfg.set(kv.substr(0, eq), kv.substr(eq + 1));
    }
    if (args.seed) cfg.set("seed", std::to_string(*args.seed));
    return cfg;
}

struct DefaultEntry {
    std::string key, value, help;
};

void print_defaults(const std::string& name, const std::vector<DefaultEntry>& defaults) {
    std::cout << "# defaults for `" << name << "` (a key = value config file)\n";
    for (const auto& d : defaults) {
        std::cout << d.key << " = " << d.value;
        if (!d.help.empty()) std::cout << "    # " << d.help;
        std::cout << "\n";
    }
}

fs::path ensure_out_dir(const CommonArgs& args) {
    fs::path dir(args.out_dir);
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw IoError("cannot create output directory: " + dir.string());
    return dir;
}

// ---------------------------------------------------------------------------
// Reference systems from config
// ---------------------------------------------------------------------------

dynamics::ReferenceSystem system_from_config(const Config& cfg, const std::string& name) {
    if (name == "mass_spring") {
        dynamics::MassSpringParams p;
        p.k1 = cfg.get_double("system.k1", p.k1);
        p.k2 = cfg.get_double("system.k2", p.k2);
        p.l1 = cfg.get_double("system.l1", p.l1);
        p.l2 = cfg.get_double("system.l2", p.l2);
        p.m1 = cfg.get_double("system.m1", p.m1);
        p.m2 = cfg.get_double("system.m2", p.m2);
        return dynamics::make_mass_spring(p);
    }
    if (name == "double_pendulum") {
        dynamics::DoublePendulumParams p;
        p.l1 = cfg.get_double("system.l1", p.l1);
        p.l2 = cfg.get_double("system.l2", p.l2);
        p.m1 = cfg.get_double("system.m1", p.m1);
        p.m2 = cfg.get_double("system.m2", p.m2);
        p.g = cfg.get_double("system.g", p.g);
        return dynamics::make_double_pendulum(p);
    }
    if (name == "kdv_semidiscrete") {
        dynamics::KdvParams p;
        p.alpha = cfg.get_double("system.alpha", p.alpha);
        p.beta = cfg.get_double("system.beta", p.beta);
        p.dx = cfg.get_double("system.dx", p.dx);
        const int n = static_cast<int>(cfg.get_long("system.n_sites", 20));
        return dynamics::make_kdv(n, p);
    }
    if (name == "harmonic_oscillator") {
        dynamics::HarmonicParams p;
        p.k = cfg.get_double("system.k", p.k);
        p.m = cfg.get_double("system.m", p.m);
        return dynamics::make_harmonic_oscillator(p);
    }
    throw ConfigError("unknown system name: " + name);
}

// ---------------------------------------------------------------------------
// Checkpoints
// ---------------------------------------------------------------------------

struct Checkpoint {
    std::string model;  // hnn | transformed | neural_ode
    std::optional<dynamics::StructureMatrix> structure;
    std::optional<nn::ScalarNet> hnet;
    std::optional<nn::VectorNet> cmap;
    std::optional<nn::VectorNet> fnet;
    json config;
    std::uint64_t seed = 0;
};

json to_json(const Checkpoint& c) {
    json j;
    j["schema_version"] = kSchemaVersion;
    j["model"] = c.model;
    if (c.structure) j["structure"] = io::to_json(*c.structure);
    if (c.hnet) j["hnet"] = io::to_json(*c.hnet);
    if (c.cmap) j["cmap"] = io::to_json(*c.cmap);
    if (c.fnet) j["fnet"] = io::to_json(*c.fnet);
    j["config"] = c.config;
    j["seed"] = c.seed;
    return j;
}

Checkpoint checkpoint_from_json(const json& j) {
    Checkpoint c;
    c.model = j.at("model").get<std::string>();
    if (j.contains("structure")) c.structure = io::structure_from_json(j["structure"]);
    if (j.contains("hnet")) c.hnet = io::scalar_net_from_json(j["hnet"]);
    if (j.contains("cmap")) c.cmap = io::vector_net_from_json(j["cmap"]);
    if (j.contains("fnet")) c.fnet = io::vector_net_from_json(j["fnet"]);
    if (j.contains("config")) c.config = j["config"];
    c.seed = j.value("seed", std::uint64_t{0});
    return c;
}

Checkpoint load_checkpoint(const std::string& path) {
    return checkpoint_from_json(io::read_json_file(path));
}

dynamics::FieldFn checkpoint_field(const Checkpoint& c) {
    if (c.model == "hnn") {
        require(c.hnet.has_value() && c.structure.has_value(),
                "checkpoint: hnn model needs hnet and structure");
        return [hnet = *c.hnet, s = *c.structure](const Vec& u) {
            return dynamics::hnn_vector_field(hnet, s, u);
        };
    }
    if (c.model == "transformed") {
        require(c.hnet.has_value() && c.cmap.has_value() && c.structure.has_value(),
                "checkpoint: transformed model needs hnet, cmap, and structure");
        return [hnet = *c.hnet, cmap = *c.cmap, s = *c.structure](const Vec& x) {
            return dynamics::transformed_vector_field(hnet, cmap, s, x);
        };
    }
    if (c.model == "neural_ode") {
        require(c.fnet.has_value(), "checkpoint: neural_ode model needs fnet");
        return [fnet = *c.fnet](const Vec& u) { return nn::forward(fnet, u); };
    }
    throw ConfigError("checkpoint: unknown model kind " + c.model);
}

// ---------------------------------------------------------------------------
// generate
// ---------------------------------------------------------------------------

const std::vector<DefaultEntry> kGenerateDefaults = {
    {"system", "mass_spring",
     "mass_spring | double_pendulum | kdv_semidiscrete | harmonic_oscillator"},
    {"system.*", "", "system parameter overrides (k1, m1, g, alpha, dx, ...)"},
    {"generate.n_traj", "100", "kdv default: 1"},
    {"generate.t0", "0"},
    {"generate.t1", "5", "kdv default: 2"},
    {"generate.n_points", "100", "per trajectory; kdv default: 201 (spacing 0.01)"},
    {"generate.sampler", "standard_normal", "or kdv_cosine (kdv default)"},
    {"generate.rtol", "1e-8"},
    {"generate.atol", "1e-10"},
    {"seed", "0"},
};

int cmd_generate(const CommonArgs& args) {
    if (args.print_config) {
        print_defaults("generate", kGenerateDefaults);
        return 0;
    }
    Config cfg = load_config(args);
    cfg.reject_unknown({"system", "system.*", "generate.*", "seed"}, "generate");

    const std::string name = cfg.get_string("system", "mass_spring");
    const bool is_kdv = name == "kdv_semidiscrete";
    auto system = system_from_config(cfg, name);
    const int n_traj = static_cast<int>(cfg.get_long("generate.n_traj", is_kdv ? 1 : 100));
    const double t0 = cfg.get_double("generate.t0", 0.0);
    const double t1 = cfg.get_double("generate.t1", is_kdv ? 2.0 : 5.0);
    const int n_points =
        static_cast<int>(cfg.get_long("generate.n_points", is_kdv ? 201 : 100));
    const auto sampler = integrators::sampler_from_string(
        cfg.get_string("generate.sampler", is_kdv ? "kdv_cosine" : "standard_normal"));
    const double rtol = cfg.get_double("generate.rtol", 1e-8);
    const double atol = cfg.get_double("generate.atol", 1e-10);
    const auto seed = static_cast<std::uint64_t>(cfg.get_long("seed", 0));

    auto ds = integrators::generate_dataset(system, n_traj, t0, t1, n_points, sampler, seed,
                                            rtol, atol);

    Config resolved = cfg;
    resolved.set("system", name);
    resolved.set("generate.n_traj", std::to_string(n_traj));
    resolved.set("generate.t0", format_g17(t0));
    resolved.set("generate.t1", format_g17(t1));
    resolved.set("generate.n_points", std::to_string(n_points));
    resolved.set("generate.sampler", integrators::to_string(sampler));
    resolved.set("generate.rtol", format_g17(rtol));
    resolved.set("generate.atol", format_g17(atol));
    resolved.set("seed", std::to_string(seed));

    const fs::path dir = ensure_out_dir(args);
    io::write_dataset_csv((dir / "dataset.csv").string(), ds);
    io::write_json_file((dir / "dataset.meta.json").string(),
                        io::dataset_meta_to_json(ds, resolved.to_json()));
    std::cout << "dataset: " << (dir / "dataset.csv").string() << "\n"
              << "samples: " << ds.size() << "\n"
              << "input_radius: " << format_g17(ds.input_radius) << "\n";
    return 0;
}

// ---------------------------------------------------------------------------
// train
// ---------------------------------------------------------------------------

const std::vector<DefaultEntry> kTrainDefaults = {
    {"train.dataset", "dataset.csv", "sidecar .meta.json is found next to it"},
    {"train.model", "hnn", "hnn (alias naive_hnn) | transformed | neural_ode"},
    {"train.arch", "mlp", "mlp | conv (kdv datasets default to conv)"},
    {"train.hidden", "50", "comma-separated hidden widths for mlp"},
    {"train.cmap_hidden", "", "coordinate-map hidden widths (default: train.hidden)"},
    {"train.channels", "200", "hidden channels for conv"},
    {"train.kernels", "3,1,1", "conv kernel sizes"},
    {"train.init", "", "fan_uniform | orthogonal (default: mlp fan, conv orthogonal)"},
    {"train.structure", "", "canonical_symplectic | central_difference (default by system)"},
    {"train.dx", "", "grid spacing for difference structures (default: dataset provenance)"},
    {"train.loss", "symplectic", "symplectic | raw"},
    {"train.p", "2"},
    {"train.lr", "1e-3"},
    {"train.beta1", "0.9"},
    {"train.beta2", "0.999"},
    {"train.eps", "1e-8"},
    {"train.iterations", "10000"},
    {"train.batch_size", "200", "kdv default: whole orbit"},
    {"seed", "0"},
};

std::vector<int> parse_int_list(const std::string& s) {
    std::vector<int> out;
    std::stringstream ss(s);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
        if (!tok.empty()) out.push_back(std::stoi(tok));
    }
    require(!out.empty(), "expected a comma-separated integer list, got: " + s);
    return out;
}

dynamics::StructureMatrix structure_for_training(const Config& cfg,
                                                 const integrators::GradientDataset& ds) {
    const bool is_kdv = ds.provenance.system == "kdv_semidiscrete";
    const std::string kind = cfg.get_string(
        "train.structure", is_kdv ? "central_difference" : "canonical_symplectic");
    const int dim = ds.dim();
    if (kind == "canonical_symplectic") {
        require(dim % 2 == 0, "canonical_symplectic needs an even state dimension");
        return dynamics::StructureMatrix::canonical_symplectic(dim / 2);
    }
    if (kind == "central_difference") {
        double dx = cfg.get_double("train.dx", 0.0);
        if (dx == 0.0) {
            auto it = ds.provenance.system_params.find("dx");
            require(it != ds.provenance.system_params.end(),
                    "train.dx required (dataset has no dx in provenance)");
            dx = it->second;
        }
        return dynamics::StructureMatrix::central_difference(dim, dx);
    }
    if (kind == "second_difference") {
        const double dx = cfg.get_double("train.dx", 1.0);
        return dynamics::StructureMatrix::second_difference(dim, dx);
    }
    throw ConfigError("unknown train.structure: " + kind);
}

int cmd_train(const CommonArgs& args) {
    if (args.print_config) {
        print_defaults("train", kTrainDefaults);
        return 0;
    }
    Config cfg = load_config(args);
    cfg.reject_unknown({"train.*", "seed"}, "train");

    const std::string csv = cfg.require_string("train.dataset");
    std::string meta = csv;
    const auto pos = meta.rfind(".csv");
    require(pos != std::string::npos, "train.dataset must be a .csv path");
    meta.replace(pos, 4, ".meta.json");
    auto ds = io::read_dataset_csv(csv, meta);

    std::string model = cfg.get_string("train.model", "hnn");
    if (model == "naive_hnn") model = "hnn";
    const bool is_kdv = ds.provenance.system == "kdv_semidiscrete";
    const std::string arch_kind = cfg.get_string("train.arch", is_kdv ? "conv" : "mlp");
    const auto seed = static_cast<std::uint64_t>(cfg.get_long("seed", 0));

    training::TrainConfig tc;
    tc.adam.lr = cfg.get_double("train.lr", 1e-3);
    tc.adam.beta1 = cfg.get_double("train.beta1", 0.9);
    tc.adam.beta2 = cfg.get_double("train.beta2", 0.999);
    tc.adam.eps = cfg.get_double("train.eps", 1e-8);
    tc.iterations = cfg.get_long("train.iterations", 10000);
    tc.batch_size = cfg.get_long("train.batch_size", is_kdv ? ds.size() : 200);
    tc.seed = seed;

    const double p = cfg.get_double("train.p", 2.0);
    const std::string loss_kind = cfg.get_string("train.loss", "symplectic");
    require(loss_kind == "symplectic" || loss_kind == "raw",
            "train.loss must be symplectic or raw");

    nn::ArchSpec harch;
    if (arch_kind == "conv") {
        const int channels = static_cast<int>(cfg.get_long("train.channels", 200));
        auto kernels = parse_int_list(cfg.get_string("train.kernels", "3,1,1"));
        std::vector<int> chan{1};
        for (size_t i = 0; i + 1 < kernels.size(); ++i) chan.push_back(channels);
        chan.push_back(1);
        harch = nn::ArchSpec::conv1d(ds.dim(), chan, kernels);
    } else {
        harch = nn::ArchSpec::mlp(ds.dim(), parse_int_list(cfg.get_string("train.hidden", "50")),
                                  1);
    }
    const std::string init_kind = cfg.get_string("train.init", "");
    if (!init_kind.empty()) harch.init = nn::init_kind_from_string(init_kind);

    Config resolved = cfg;
    resolved.set("train.model", model);
    resolved.set("train.arch", arch_kind);
    resolved.set("train.p", format_g17(p));
    resolved.set("train.loss", loss_kind);
    resolved.set("train.lr", format_g17(tc.adam.lr));
    resolved.set("train.iterations", std::to_string(tc.iterations));
    resolved.set("train.batch_size", std::to_string(tc.batch_size));
    resolved.set("seed", std::to_string(seed));

    const fs::path dir = ensure_out_dir(args);
    Checkpoint ckpt;
    ckpt.model = model;
    ckpt.seed = seed;
    training::TrainReport report;

    try {
        if (model == "neural_ode") {
            auto farch = nn::ArchSpec::mlp(
                ds.dim(), parse_int_list(cfg.get_string("train.hidden", "50")), ds.dim());
            auto fnet = nn::init_vector_network(farch, seed);
            training::LossConfig loss;
            loss.p = p;
            report = training::train_vector_field(fnet, ds, loss, tc);
            ckpt.fnet = std::move(fnet);
        } else if (model == "transformed") {
            auto structure = structure_for_training(cfg, ds);
            auto hnet = nn::init_network(harch, seed);
            auto carch = nn::ArchSpec::mlp(
                ds.dim(),
                parse_int_list(
                    cfg.get_string("train.cmap_hidden", cfg.get_string("train.hidden", "50"))),
                ds.dim());
            auto cmap = nn::init_vector_network(carch, seed + 1);
            training::LossConfig loss;
            loss.p = p;
            report = training::train_transformed(hnet, cmap, ds, loss, tc, structure);
            ckpt.hnet = std::move(hnet);
            ckpt.cmap = std::move(cmap);
            ckpt.structure = std::move(structure);
        } else {
            auto structure = structure_for_training(cfg, ds);
            auto hnet = nn::init_network(harch, seed);
            training::LossConfig loss;
            loss.p = p;
            if (loss_kind == "symplectic") {
                loss.target = training::LossTarget::SymplecticGradient;
                loss.structure = structure.matrix();
            }
            report = training::train(hnet, ds, loss, tc);
            ckpt.hnet = std::move(hnet);
            ckpt.structure = std::move(structure);
        }
    } catch (const TrainingDivergedError& e) {
        std::cerr << "error: " << e.what() << "\n";
        json j;
        j["schema_version"] = kSchemaVersion;
        j["model"] = model;
        j["diverged_at_iteration"] = e.iteration;
        j["last_good_iteration"] = e.last_good_iteration;
        j["last_good_params"] = io::vector_to_json(e.last_good_params);
        j["config"] = resolved.to_json();
        io::write_json_file((dir / "model.last_good.json").string(), j);
        std::cerr << "last-good checkpoint: " << (dir / "model.last_good.json").string()
                  << "\n";
        return 3;
    }

    ckpt.config = resolved.to_json();
    io::write_json_file((dir / "model.json").string(), to_json(ckpt));
    io::write_json_file((dir / "train_report.json").string(),
                        io::to_json(report, resolved.to_json()));
    std::cout << "final_train_loss: " << format_g17(report.final_train_loss) << "\n"
              << "max_batch_loss: " << format_g17(report.max_batch_loss) << "\n"
              << "checkpoint: " << (dir / "model.json").string() << "\n";
    return std::isfinite(report.final_train_loss) ? 0 : 3;
}

// ---------------------------------------------------------------------------
// simulate
// ---------------------------------------------------------------------------

const std::vector<DefaultEntry> kSimulateDefaults = {
    {"simulate.model", "", "checkpoint path; empty = simulate the true system"},
    {"simulate.system", "", "true system name when no model is given"},
    {"system.*", "", "system parameter overrides"},
    {"simulate.t0", "0"},
    {"simulate.t1", "5"},
    {"simulate.dt", "0.01", "output spacing"},
    {"simulate.u0", "", "comma-separated initial state; or use simulate.ic"},
    {"simulate.ic", "standard_normal", "kdv_cosine | standard_normal (seeded)"},
    {"simulate.rtol", "1e-8"},
    {"simulate.atol", "1e-10"},
    {"seed", "0"},
};

int cmd_simulate(const CommonArgs& args) {
    if (args.print_config) {
        print_defaults("simulate", kSimulateDefaults);
        return 0;
    }
    Config cfg = load_config(args);
    cfg.reject_unknown({"simulate.*", "system.*", "seed"}, "simulate");

    const std::string model_path = cfg.get_string("simulate.model", "");
    dynamics::FieldFn field;
    int dim = 0;
    std::string source;
    if (!model_path.empty()) {
        auto ckpt = load_checkpoint(model_path);
        field = checkpoint_field(ckpt);
        if (ckpt.hnet)
            dim = ckpt.hnet->input_dim();
        else if (ckpt.fnet)
            dim = ckpt.fnet->input_dim();
        source = "model:" + ckpt.model;
    } else {
        const std::string name = cfg.require_string("simulate.system");
        auto system = system_from_config(cfg, name);
        field = system.vector_field;
        dim = system.dim;
        source = "system:" + name;
    }

    const double t0 = cfg.get_double("simulate.t0", 0.0);
    const double t1 = cfg.get_double("simulate.t1", 5.0);
    const double dt = cfg.get_double("simulate.dt", 0.01);
    require(t1 > t0 && dt > 0, "simulate: need t1 > t0 and dt > 0");

    Vec u0;
    const std::string u0_str = cfg.get_string("simulate.u0", "");
    const std::string ic = cfg.get_string("simulate.ic", "");
    if (!u0_str.empty()) {
        std::vector<double> vals;
        std::stringstream ss(u0_str);
        std::string tok;
        while (std::getline(ss, tok, ',')) vals.push_back(std::stod(tok));
        u0 = Eigen::Map<Vec>(vals.data(), static_cast<long>(vals.size()));
    } else if (ic == "kdv_cosine") {
        const double dx = cfg.get_double("system.dx", 0.1);
        u0.resize(dim);
        for (int i = 0; i < dim; ++i) u0(i) = std::cos(M_PI * dx * i);
    } else if (ic == "standard_normal" || ic.empty()) {
        std::mt19937_64 rng(static_cast<std::uint64_t>(cfg.get_long("seed", 0)));
        std::normal_distribution<double> dist(0.0, 1.0);
        u0.resize(dim);
        for (int i = 0; i < dim; ++i) u0(i) = dist(rng);
    } else {
        throw ConfigError("unknown simulate.ic: " + ic);
    }
    require(u0.size() == dim, "simulate: initial state has dimension " +
                                  std::to_string(u0.size()) + ", expected " +
                                  std::to_string(dim));

    integrators::Dopri45Options opt;
    opt.rtol = cfg.get_double("simulate.rtol", 1e-8);
    opt.atol = cfg.get_double("simulate.atol", 1e-10);
    std::vector<double> times;
    for (long i = 0;; ++i) {
        const double t = t0 + dt * static_cast<double>(i);
        if (t > t1 + 1e-12) break;
        times.push_back(std::min(t, t1));
    }

    auto traj = integrators::dopri45(field, u0, t0, t1, opt, times);
    traj.meta["source"] = source;

    Config resolved = cfg;
    resolved.set("simulate.t0", format_g17(t0));
    resolved.set("simulate.t1", format_g17(t1));
    resolved.set("simulate.dt", format_g17(dt));
    const fs::path dir = ensure_out_dir(args);
    io::write_trajectory_csv((dir / "trajectory.csv").string(), traj, resolved.to_json());
    std::cout << "trajectory: " << (dir / "trajectory.csv").string() << "\n"
              << "points: " << traj.size() << "\n";
    return 0;
}

// ---------------------------------------------------------------------------
// bounds
// ---------------------------------------------------------------------------

const std::vector<DefaultEntry> kBoundsDefaults = {
    {"bounds.model", "model.json", "checkpoint with an hnet"},
    {"bounds.dataset", "dataset.csv"},
    {"bounds.delta", "0.05", "confidence level"},
    {"bounds.p", "", "defaults to the training exponent in the checkpoint"},
    {"bounds.M", "", "half phase-space dimension; defaults to dim/2"},
    {"bounds.c_sobolev", "1", "user-supplied Sobolev constant (warned)"},
    {"bounds.inf_density", "1", "inf of the sampling density (warned)"},
    {"bounds.c_loss", "", "uniform loss bound; default (2*grad bound)^p"},
    {"bounds.rho_p", "", "loss Lipschitz; default p*(2*grad bound)^(p-1)"},
    {"bounds.l_train", "", "default: recomputed from model + dataset"},
    {"bounds.kam.eps0", "1", "KAM threshold"},
    {"bounds.kam.c1", "", "defaults mapped from the chain constants"},
    {"bounds.kam.c2", "", ""},
    {"bounds.kam.c3", "", ""},
};

int cmd_bounds(const CommonArgs& args) {
    if (args.print_config) {
        print_defaults("bounds", kBoundsDefaults);
        return 0;
    }
    Config cfg = load_config(args);
    cfg.reject_unknown({"bounds.*", "seed"}, "bounds");

    auto ckpt = load_checkpoint(cfg.get_string("bounds.model", "model.json"));
    require(ckpt.hnet.has_value(), "bounds: checkpoint has no Hamiltonian network");
    const std::string csv = cfg.get_string("bounds.dataset", "dataset.csv");
    std::string meta = csv;
    const auto pos = meta.rfind(".csv");
    require(pos != std::string::npos, "bounds.dataset must be a .csv path");
    meta.replace(pos, 4, ".meta.json");
    auto ds = io::read_dataset_csv(csv, meta);
    require(ds.dim() == ckpt.hnet->input_dim(), "bounds: dataset/model dims disagree");

    std::vector<std::string> log;
    double p = cfg.get_double("bounds.p", 0.0);
    if (p == 0.0) {
        p = ckpt.config.contains("train.p")
                ? std::stod(ckpt.config["train.p"].get<std::string>())
                : 2.0;
        log.push_back("p taken from the checkpoint training config: p = " + format_g17(p));
    }

    nn::NormProfile profile = nn::norm_profile(*ckpt.hnet, ds.input_radius, 1.0, ds.size());
    const double grad_bound = profile.gradient_norm_bound();
    double rho_p = cfg.get_double("bounds.rho_p", 0.0);
    if (rho_p == 0.0) {
        rho_p = bounds::default_loss_lipschitz(grad_bound, p);
        log.push_back("rho_p defaulted to p*(2*grad_bound)^(p-1) = " + format_g17(rho_p));
    }
    profile.loss_lipschitz = rho_p;

    bounds::BoundInputs in;
    in.profile = profile;
    in.n = ds.size();
    in.p = p;
    in.delta = cfg.get_double("bounds.delta", 0.05);
    double c_loss = cfg.get_double("bounds.c_loss", 0.0);
    if (c_loss == 0.0) {
        c_loss = bounds::default_c_loss(profile, p);
        log.push_back("c_loss defaulted to (2*grad_bound)^p = " + format_g17(c_loss));
    }
    in.c_loss = c_loss;

    double l_train = cfg.get_double("bounds.l_train", -1.0);
    if (l_train < 0.0) {
        training::LossConfig loss;
        loss.p = p;
        if (ckpt.structure) {
            loss.target = training::LossTarget::SymplecticGradient;
            loss.structure = ckpt.structure->matrix();
            log.push_back("L_train recomputed with the symplectic-gradient loss of the "
                          "checkpoint structure");
        } else {
            log.push_back("L_train recomputed with the raw-gradient loss");
        }
        auto st = diagnostics::gradient_test_error(*ckpt.hnet, ds, loss);
        l_train = st.mean;
    }
    in.l_train = l_train;

    long m = cfg.get_long("bounds.M", 0);
    if (m == 0) {
        m = ds.dim() / 2;
        log.push_back("M defaulted to dim/2 = " + std::to_string(m));
    }
    in.half_dim_m = static_cast<int>(m);

    in.c_sobolev = cfg.get_double("bounds.c_sobolev", 1.0);
    in.inf_density = cfg.get_double("bounds.inf_density", 1.0);
    if (!cfg.has("bounds.c_sobolev") || !cfg.has("bounds.inf_density"))
        log.push_back("WARNING: Sobolev constant and/or inf density left at the default 1.0; "
                      "these are user-supplied assumptions, not computed quantities");

    const double eps0 = cfg.get_double("bounds.kam.eps0", 1.0);
    bounds::KamConstants kamc =
        bounds::default_kam_constants(in.c_sobolev, in.inf_density, p, in.c_loss, eps0);
    const bool kam_defaulted = !cfg.has("bounds.kam.c1") && !cfg.has("bounds.kam.c2") &&
                               !cfg.has("bounds.kam.c3");
    kamc.c1 = cfg.get_double("bounds.kam.c1", kamc.c1);
    kamc.c2 = cfg.get_double("bounds.kam.c2", kamc.c2);
    kamc.c3 = cfg.get_double("bounds.kam.c3", kamc.c3);
    if (kam_defaulted)
        log.push_back("KAM constants defaulted from the chain: c1 = " + format_g17(kamc.c1) +
                      ", c2 = " + format_g17(kamc.c2) + ", c3 = " + format_g17(kamc.c3) +
                      " (kappa = C_sobolev^p / inf_density mapping)");
    in.kam = kamc;

    auto report = bounds::make_bound_report(in, std::move(log));

    Config resolved = cfg;
    resolved.set("bounds.p", format_g17(p));
    resolved.set("bounds.l_train", format_g17(l_train));
    const fs::path dir = ensure_out_dir(args);
    io::write_json_file((dir / "bound_report.json").string(),
                        io::to_json(report, resolved.to_json()));
    std::cout << io::bound_report_table(report);
    std::cout << "report: " << (dir / "bound_report.json").string() << "\n";
    return 0;
}

// ---------------------------------------------------------------------------
// diagnose
// ---------------------------------------------------------------------------

const std::vector<DefaultEntry> kDiagnoseDefaults = {
    {"diagnose.kind", "energy_drift",
     "energy_drift | recurrence | gradient_error | hvalue_error"},
    {"diagnose.trajectory", "trajectory.csv", "input trajectory (drift, recurrence, grids)"},
    {"diagnose.system", "", "true system for H (drift, hvalue_error)"},
    {"system.*", "", "system parameter overrides"},
    {"diagnose.model", "", "checkpoint (gradient_error, hvalue_error, model drift)"},
    {"diagnose.dataset", "", "dataset CSV (gradient_error)"},
    {"diagnose.p", "2", "loss exponent (gradient_error)"},
    {"diagnose.t_center", "9.8", "recurrence window center"},
    {"diagnose.window", "0.5", "recurrence window half-width"},
};

int cmd_diagnose(const CommonArgs& args) {
    if (args.print_config) {
        print_defaults("diagnose", kDiagnoseDefaults);
        return 0;
    }
    Config cfg = load_config(args);
    cfg.reject_unknown({"diagnose.*", "system.*", "seed"}, "diagnose");

    const std::string kind = cfg.get_string("diagnose.kind", "energy_drift");
    const fs::path dir = ensure_out_dir(args);
    const json resolved = cfg.to_json();

    if (kind == "energy_drift") {
        auto traj =
            io::read_trajectory_csv(cfg.get_string("diagnose.trajectory", "trajectory.csv"));
        dynamics::EnergyFn energy;
        const std::string model_path = cfg.get_string("diagnose.model", "");
        if (!model_path.empty()) {
            auto ckpt = load_checkpoint(model_path);
            require(ckpt.hnet.has_value(), "energy_drift on a model needs an hnet");
            energy = [hnet = *ckpt.hnet](const Vec& u) { return nn::forward(hnet, u); };
        } else {
            auto system = system_from_config(cfg, cfg.require_string("diagnose.system"));
            energy = system.hamiltonian;
        }
        auto d = diagnostics::energy_drift(traj, energy);
        io::write_series_csv((dir / "energy_drift.csv").string(), {"t", "drift"},
                             {d.times, d.series}, resolved);
        json j = {{"schema_version", kSchemaVersion},
                  {"kind", "energy_drift"},
                  {"max_abs", d.max_abs},
                  {"mean_abs", d.mean_abs},
                  {"config", resolved}};
        io::write_json_file((dir / "energy_drift.json").string(), j);
        std::cout << "max_abs: " << format_g17(d.max_abs) << "\n"
                  << "mean_abs: " << format_g17(d.mean_abs) << "\n";
        return 0;
    }

    if (kind == "recurrence") {
        auto traj =
            io::read_trajectory_csv(cfg.get_string("diagnose.trajectory", "trajectory.csv"));
        const Vec reference = traj.states.front();
        auto r = diagnostics::recurrence_error(traj, reference,
                                               cfg.get_double("diagnose.t_center", 9.8),
                                               cfg.get_double("diagnose.window", 0.5));
        json j = {{"schema_version", kSchemaVersion},
                  {"kind", "recurrence"},
                  {"t_best", r.t_best},
                  {"min_error", r.min_error},
                  {"config", resolved}};
        io::write_json_file((dir / "recurrence.json").string(), j);
        std::cout << "t_best: " << format_g17(r.t_best) << "\n"
                  << "min_error: " << format_g17(r.min_error) << "\n";
        return 0;
    }

    if (kind == "gradient_error") {
        auto ckpt = load_checkpoint(cfg.get_string("diagnose.model", "model.json"));
        require(ckpt.hnet.has_value(), "gradient_error needs an hnet checkpoint");
        const std::string csv = cfg.require_string("diagnose.dataset");
        std::string meta = csv;
        const auto pos = meta.rfind(".csv");
        require(pos != std::string::npos, "diagnose.dataset must be a .csv path");
        meta.replace(pos, 4, ".meta.json");
        auto ds = io::read_dataset_csv(csv, meta);
        training::LossConfig loss;
        loss.p = cfg.get_double("diagnose.p", 2.0);
        if (ckpt.structure) {
            loss.target = training::LossTarget::SymplecticGradient;
            loss.structure = ckpt.structure->matrix();
        }
        auto st = diagnostics::gradient_test_error(*ckpt.hnet, ds, loss);
        json j = {{"schema_version", kSchemaVersion},
                  {"kind", "gradient_error"},
                  {"mean", st.mean},
                  {"max", st.max},
                  {"config", resolved}};
        io::write_json_file((dir / "gradient_error.json").string(), j);
        std::cout << "mean: " << format_g17(st.mean) << "\n"
                  << "max: " << format_g17(st.max) << "\n";
        return 0;
    }

    if (kind == "hvalue_error") {
        auto ckpt = load_checkpoint(cfg.get_string("diagnose.model", "model.json"));
        require(ckpt.hnet.has_value(), "hvalue_error needs an hnet checkpoint");
        auto system = system_from_config(cfg, cfg.require_string("diagnose.system"));
        auto traj =
            io::read_trajectory_csv(cfg.get_string("diagnose.trajectory", "trajectory.csv"));
        nn::ScalarNet aligned = *ckpt.hnet;
        const double offset = training::align_mean(aligned, system.hamiltonian, traj.states);
        aligned.add_output_offset(offset);
        auto st = diagnostics::hamiltonian_value_error(aligned, system.hamiltonian, traj.states);
        std::vector<double> errs;
        errs.reserve(traj.states.size());
        for (size_t i = 0; i < traj.states.size(); ++i)
            errs.push_back(system.hamiltonian(traj.states[i]) -
                           nn::forward(aligned, traj.states[i]));
        io::write_series_csv((dir / "hvalue_error.csv").string(), {"t", "error"},
                             {traj.times, errs}, resolved);
        json j = {{"schema_version", kSchemaVersion},
                  {"kind", "hvalue_error"},
                  {"alignment_offset", offset},
                  {"mean_abs", st.mean_abs},
                  {"max_abs", st.max_abs},
                  {"config", resolved}};
        io::write_json_file((dir / "hvalue_error.json").string(), j);
        std::cout << "mean_abs: " << format_g17(st.mean_abs) << "\n"
                  << "max_abs: " << format_g17(st.max_abs) << "\n";
        return 0;
    }

    throw ConfigError("unknown diagnose.kind: " + kind);
}

// ---------------------------------------------------------------------------
// plot
// ---------------------------------------------------------------------------

int cmd_plot(const CommonArgs& args, const std::vector<std::string>& inputs,
             const std::string& title) {
    if (args.print_config) {
        print_defaults("plot", {{"(positional)", "file.csv ...", "series CSVs to render"}});
        return 0;
    }
    require(!inputs.empty(), "plot: no input CSV files given");
    const fs::path dir = ensure_out_dir(args);
    for (const auto& input : inputs) {
        // generic series CSV: first column is x, the rest are series
        std::istringstream in(io::read_text_file(input));
        std::string line;
        std::vector<std::string> names;
        std::vector<std::vector<double>> cols;
        while (std::getline(in, line)) {
            if (line.empty() || line[0] == '#') continue;
            auto cells = io::detail::split_csv_line(line);
            if (names.empty()) {
                names = cells;
                cols.resize(cells.size());
                continue;
            }
            require(cells.size() == names.size(), "plot: ragged CSV " + input);
            for (size_t c = 0; c < cells.size(); ++c) cols[c].push_back(std::stod(cells[c]));
        }
        require(names.size() >= 2, "plot: need at least two columns in " + input);
        std::vector<cli::SvgSeries> series;
        for (size_t c = 1; c < names.size(); ++c)
            series.push_back({names[c], "", cols[0], cols[c]});
        const fs::path out = dir / (fs::path(input).stem().string() + ".svg");
        io::write_text_file(
            out.string(),
            cli::render_line_chart(title.empty() ? fs::path(input).stem().string() : title,
                                   series));
        std::cout << "svg: " << out.string() << "\n";
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"hamcert: train neural Hamiltonians by gradient matching, simulate them, "
                 "and compute certified generalization/KAM bounds"};
    app.require_subcommand(1);

    CommonArgs gen_args, train_args, sim_args, bounds_args, diag_args, plot_args;
    std::vector<std::string> plot_inputs;
    std::string plot_title;

    auto* c_gen = app.add_subcommand("generate", "integrate a benchmark system into a dataset");
    add_common(c_gen, gen_args);
    std::string gen_system;
    c_gen->add_option("--system", gen_system, "benchmark system name");

    auto* c_train = app.add_subcommand("train", "fit a model to a dataset");
    add_common(c_train, train_args);
    std::string train_model, train_dataset;
    c_train->add_option("--model", train_model, "hnn | naive_hnn | transformed | neural_ode");
    c_train->add_option("--dataset", train_dataset, "dataset CSV path");

    auto* c_sim = app.add_subcommand("simulate", "integrate a trained model or true system");
    add_common(c_sim, sim_args);
    std::string sim_model, sim_system;
    c_sim->add_option("--model", sim_model, "checkpoint path");
    c_sim->add_option("--system", sim_system, "true system name");

    auto* c_bounds = app.add_subcommand("bounds", "compute the certified bound chain");
    add_common(c_bounds, bounds_args);
    std::string bounds_model, bounds_dataset;
    c_bounds->add_option("--model", bounds_model, "checkpoint path");
    c_bounds->add_option("--dataset", bounds_dataset, "dataset CSV path");

    auto* c_diag = app.add_subcommand("diagnose", "energy drift, recurrence, error stats");
    add_common(c_diag, diag_args);
    std::string diag_kind;
    c_diag->add_option("--kind", diag_kind,
                       "energy_drift | recurrence | gradient_error | hvalue_error");

    auto* c_plot = app.add_subcommand("plot", "render series CSVs to SVG line charts");
    add_common(c_plot, plot_args);
    c_plot->add_option("files", plot_inputs, "input CSV files");
    c_plot->add_option("--title", plot_title, "chart title");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) {
            app.exit(e);
            return 0;
        }
        std::cerr << e.what() << "\n";
        return 2;
    }

    try {
        if (*c_gen) {
            if (!gen_system.empty()) gen_args.overrides.push_back("system=" + gen_system);
            return cmd_generate(gen_args);
        }
        if (*c_train) {
            if (!train_model.empty())
                train_args.overrides.push_back("train.model=" + train_model);
            if (!train_dataset.empty())
                train_args.overrides.push_back("train.dataset=" + train_dataset);
            return cmd_train(train_args);
        }
        if (*c_sim) {
            if (!sim_model.empty()) sim_args.overrides.push_back("simulate.model=" + sim_model);
            if (!sim_system.empty())
                sim_args.overrides.push_back("simulate.system=" + sim_system);
            return cmd_simulate(sim_args);
        }
        if (*c_bounds) {
            if (!bounds_model.empty())
                bounds_args.overrides.push_back("bounds.model=" + bounds_model);
            if (!bounds_dataset.empty())
                bounds_args.overrides.push_back("bounds.dataset=" + bounds_dataset);
            return cmd_bounds(bounds_args);
        }
        if (*c_diag) {
            if (!diag_kind.empty()) diag_args.overrides.push_back("diagnose.kind=" + diag_kind);
            return cmd_diagnose(diag_args);
        }
        if (*c_plot) return cmd_plot(plot_args, plot_inputs, plot_title);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const IoError& e) {
        std::cerr << "io error: " << e.what() << "\n";
        return 4;
    } catch (const NumericError& e) {
        std::cerr << "numerical error: " << e.what() << "\n";
        return 3;
    } catch (const std::invalid_argument& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 2;
}
