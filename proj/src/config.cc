// Copyright 2026 The tieq Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "tieq/config.h"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <regex>
#include <set>

#include "tieq/errors.h"

namespace tieq {

using nlohmann::json;

namespace {

void reject_unknown_keys(const json &obj, const std::set<std::string> &allowed, const std::string &where) {
    if (!obj.is_object()) {
        throw ConfigError(where + " must be a JSON object");
    }
    for (const auto &[key, value] : obj.items()) {
        if (!allowed.count(key)) {
            throw ConfigError("unknown config key '" + where + "." + key + "'");
        }
    }
}

template <typename T>
void read_if(const json &obj, const char *key, T &out) {
    if (obj.contains(key) && !obj.at(key).is_null()) {
        out = obj.at(key).get<T>();
    }
}

json roi_to_json(const Roi &roi) {
    return json{{"x0_px", roi.x0}, {"y0_px", roi.y0}, {"width_px", roi.width}, {"height_px", roi.height}};
}

Roi roi_from_json(const json &j) {
    reject_unknown_keys(j, {"x0_px", "y0_px", "width_px", "height_px"}, "roi");
    return Roi{j.at("x0_px").get<int>(), j.at("y0_px").get<int>(), j.at("width_px").get<int>(),
               j.at("height_px").get<int>()};
}

std::string profile_name(IlluminationSpec::Profile p) {
    return p == IlluminationSpec::Profile::Uniform ? "uniform" : "gaussian";
}

IlluminationSpec::Profile parse_profile(const std::string &s) {
    if (s == "uniform") {
        return IlluminationSpec::Profile::Uniform;
    }
    if (s == "gaussian") {
        return IlluminationSpec::Profile::Gaussian;
    }
    throw ConfigError("unknown illumination profile '" + s + "'");
}

}  // namespace

std::string Mode::name() const {
    switch (kind) {
        case Kind::Classical:
            return "classical";
        case Kind::Quantum:
            return "quantum";
        case Kind::MultiFrame:
            return "multi_frame(" + std::to_string(frames) + ")";
    }
    return "?";
}

Mode Mode::parse(const std::string &text) {
    if (text == "classical") {
        return {Kind::Classical, 1};
    }
    if (text == "quantum") {
        return {Kind::Quantum, 1};
    }
    static const std::regex multi(R"(multi_frame[(:](\d+)\)?)");
    std::smatch m;
    if (std::regex_match(text, m, multi)) {
        int n = std::stoi(m[1]);
        if (n < 1) {
            throw ConfigError("multi_frame needs N >= 1");
        }
        return {Kind::MultiFrame, n};
    }
    throw ConfigError("unknown mode '" + text + "'");
}

Grid ExperimentConfig::frame_grid() const {
    return Grid(nx, ny, pitch_um, wavelength_um);
}

Grid ExperimentConfig::sim_grid() const {
    return Grid(nx + 2 * guard_px, ny + 2 * guard_px, pitch_um, wavelength_um);
}

SourceModel ExperimentConfig::resolved_source() const {
    SourceModel out = source;
    if (eta_target) {
        out.eta0 = eta0_for_heralding(*eta_target, eta_target_filter_px * pitch_um, source.misalignment_um,
                                      source.sigma_corr_um);
    }
    return out;
}

void ExperimentConfig::validate() const {
    Grid frame = frame_grid();
    if (guard_px < 0) {
        throw ConfigError("guard_px must be non-negative");
    }
    Grid sim = sim_grid();
    if (illumination.aperture_half_width_um > 0) {
        double half_extent = 0.5 * std::min(sim.nx(), sim.ny()) * pitch_um;
        if (illumination.aperture_half_width_um + illumination.rolloff_um > half_extent) {
            throw ConfigError("illumination aperture does not fit inside the simulation grid");
        }
    }
    if (sample_kind == SampleKind::CustomFile) {
        if (sample_path.empty() || !std::filesystem::exists(sample_path)) {
            throw ConfigError("custom sample file not found: '" + sample_path + "'");
        }
    } else if (!(step_rad > 0 && step_rad < 3.141592653589793)) {
        throw ConfigError("step_rad must lie in (0, pi)");
    }
    if (rois) {
        rois->inside.validate(frame);
        rois->outside.validate(frame);
        if (rois->inside.overlaps(rois->outside)) {
            throw ConfigError("phase-step ROIs overlap");
        }
    }
    source.validate();
    if (eta_target) {
        if (!(*eta_target > 0 && *eta_target <= 1) || eta_target_filter_px < 1) {
            throw ConfigError("eta_target must lie in (0, 1] with a positive filter size");
        }
        resolved_source().validate();
    }
    if (dz_um.empty()) {
        throw ConfigError("dz_um list is empty");
    }
    const double limit = max_safe_dz_um(sim);
    auto check_dz = [&](double dz) {
        if (!(dz > 0)) {
            throw ConfigError("dz values must be positive");
        }
        if (dz > limit) {
            throw AliasingError("dz = " + std::to_string(dz) + " um exceeds the sampling bound; max safe dz is " +
                                    std::to_string(limit) + " um",
                                limit);
        }
    };
    for (double dz : dz_um) {
        check_dz(dz);
    }
    if (frames_per_point < 1) {
        throw ConfigError("frames_per_point must be >= 1");
    }
    if (filter_size_px < 1 || filter_size_px > std::min(nx, ny)) {
        throw ConfigError("filter_size_px out of range");
    }
    for (int d : filter_sweep_px) {
        if (d < 1 || d > std::min(nx, ny)) {
            throw ConfigError("filter_sweep_px entry out of range");
        }
    }
    if (!filter_sweep_px.empty()) {
        check_dz(filter_sweep_dz_um);
    }
    if (modes.empty()) {
        throw ConfigError("no modes selected");
    }
    if (threads < 1) {
        throw ConfigError("threads must be >= 1");
    }
    if (calibration_frames < 2) {
        throw ConfigError("calibration_frames must be >= 2");
    }
    if (k_factor && !(*k_factor >= 0 && *k_factor <= 1)) {
        throw ConfigError("k_factor must lie in [0, 1]");
    }
    if (!(regularization_eps >= 0)) {
        throw ConfigError("regularization_eps must be non-negative");
    }
    if (border_px < 0 || 2 * border_px >= std::min(nx, ny)) {
        throw ConfigError("border_px out of range");
    }
    if (images_per_point < 0) {
        throw ConfigError("images_per_point must be >= 0");
    }
}

json grid_to_json(const Grid &grid) {
    return json{{"nx", grid.nx()}, {"ny", grid.ny()}, {"pitch_um", grid.pitch_um()},
                {"wavelength_um", grid.wavelength_um()}};
}

Grid grid_from_json(const json &j) {
    return Grid(j.at("nx").get<int>(), j.at("ny").get<int>(), j.at("pitch_um").get<double>(),
                j.at("wavelength_um").get<double>());
}

json source_to_json(const SourceModel &s) {
    return json{{"n_mean_photons", s.n_mean},
                {"eta0", s.eta0},
                {"sigma_corr_um", s.sigma_corr_um},
                {"misalignment_um", {s.misalignment_um[0], s.misalignment_um[1]}},
                {"read_noise_e", s.read_noise_e}};
}

SourceModel source_from_json(const json &j) {
    SourceModel s;
    read_if(j, "n_mean_photons", s.n_mean);
    read_if(j, "eta0", s.eta0);
    read_if(j, "sigma_corr_um", s.sigma_corr_um);
    if (j.contains("misalignment_um")) {
        auto m = j.at("misalignment_um").get<std::vector<double>>();
        if (m.size() != 2) {
            throw ConfigError("misalignment_um must have two components");
        }
        s.misalignment_um = {m[0], m[1]};
    }
    read_if(j, "read_noise_e", s.read_noise_e);
    return s;
}

json to_json(const ExperimentConfig &c) {
    json j;
    j["grid"] = {{"nx", c.nx}, {"ny", c.ny}, {"pitch_um", c.pitch_um}, {"wavelength_um", c.wavelength_um},
                 {"guard_px", c.guard_px}};
    j["illumination"] = {{"profile", profile_name(c.illumination.profile)},
                         {"fwhm_um", c.illumination.fwhm_um},
                         {"aperture_half_width_um", c.illumination.aperture_half_width_um},
                         {"rolloff_um", c.illumination.rolloff_um}};
    json sample = {{"kind", to_string(c.sample_kind)}, {"step_rad", c.step_rad}, {"path", c.sample_path}};
    if (c.rois) {
        sample["roi_in"] = roi_to_json(c.rois->inside);
        sample["roi_out"] = roi_to_json(c.rois->outside);
    }
    j["sample"] = sample;
    json source = source_to_json(c.source);
    source["eta_target"] = c.eta_target ? json(*c.eta_target) : json(nullptr);
    source["eta_target_filter_px"] = c.eta_target_filter_px;
    j["source"] = source;
    j["dz_um"] = c.dz_um;
    j["frames_per_point"] = c.frames_per_point;
    j["filter_size_px"] = c.filter_size_px;
    j["filter_sweep_px"] = c.filter_sweep_px;
    j["filter_sweep_dz_um"] = c.filter_sweep_dz_um;
    std::vector<std::string> modes;
    for (const auto &m : c.modes) {
        modes.push_back(m.name());
    }
    j["modes"] = modes;
    j["seed"] = c.seed;
    j["out_dir"] = c.out_dir;
    j["threads"] = c.threads;
    j["calibration_frames"] = c.calibration_frames;
    j["k_factor"] = c.k_factor ? json(*c.k_factor) : json(nullptr);
    j["k_per_pixel"] = c.k_per_pixel;
    j["solver"] = {{"regularization_eps", c.regularization_eps}};
    j["metrics"] = {{"border_px", c.border_px}};
    j["images_per_point"] = c.images_per_point;
    return j;
}

ExperimentConfig config_from_json(const json &j) {
    ExperimentConfig c;
    try {
        reject_unknown_keys(j,
                            {"grid", "illumination", "sample", "source", "dz_um", "frames_per_point", "filter_size_px",
                             "filter_sweep_px", "filter_sweep_dz_um", "modes", "seed", "out_dir", "threads",
                             "calibration_frames", "k_factor", "k_per_pixel", "solver", "metrics", "images_per_point"},
                            "config");
        if (j.contains("grid")) {
            const json &g = j.at("grid");
            reject_unknown_keys(g, {"nx", "ny", "pitch_um", "wavelength_um", "guard_px"}, "grid");
            read_if(g, "nx", c.nx);
            read_if(g, "ny", c.ny);
            read_if(g, "pitch_um", c.pitch_um);
            read_if(g, "wavelength_um", c.wavelength_um);
            read_if(g, "guard_px", c.guard_px);
        }
        if (j.contains("illumination")) {
            const json &il = j.at("illumination");
            reject_unknown_keys(il, {"profile", "fwhm_um", "aperture_half_width_um", "rolloff_um"}, "illumination");
            if (il.contains("profile")) {
                c.illumination.profile = parse_profile(il.at("profile").get<std::string>());
            }
            read_if(il, "fwhm_um", c.illumination.fwhm_um);
            read_if(il, "aperture_half_width_um", c.illumination.aperture_half_width_um);
            read_if(il, "rolloff_um", c.illumination.rolloff_um);
        }
        if (j.contains("sample")) {
            const json &s = j.at("sample");
            reject_unknown_keys(s, {"kind", "step_rad", "path", "roi_in", "roi_out"}, "sample");
            if (s.contains("kind")) {
                c.sample_kind = parse_sample_kind(s.at("kind").get<std::string>());
            }
            read_if(s, "step_rad", c.step_rad);
            read_if(s, "path", c.sample_path);
            if (s.contains("roi_in") != s.contains("roi_out")) {
                throw ConfigError("sample.roi_in and sample.roi_out must be given together");
            }
            if (s.contains("roi_in")) {
                c.rois = StepRois{roi_from_json(s.at("roi_in")), roi_from_json(s.at("roi_out"))};
            }
        }
        if (j.contains("source")) {
            const json &s = j.at("source");
            reject_unknown_keys(s,
                                {"n_mean_photons", "eta0", "sigma_corr_um", "misalignment_um", "read_noise_e",
                                 "eta_target", "eta_target_filter_px"},
                                "source");
            c.source = source_from_json(s);
            if (s.contains("eta_target")) {
                c.eta_target = s.at("eta_target").is_null() ? std::nullopt
                                                            : std::optional<double>(s.at("eta_target").get<double>());
            } else if (s.contains("eta0")) {
                c.eta_target.reset();
            }
            read_if(s, "eta_target_filter_px", c.eta_target_filter_px);
        }
        read_if(j, "dz_um", c.dz_um);
        read_if(j, "frames_per_point", c.frames_per_point);
        read_if(j, "filter_size_px", c.filter_size_px);
        read_if(j, "filter_sweep_px", c.filter_sweep_px);
        read_if(j, "filter_sweep_dz_um", c.filter_sweep_dz_um);
        if (j.contains("modes")) {
            c.modes.clear();
            for (const auto &m : j.at("modes")) {
                c.modes.push_back(Mode::parse(m.get<std::string>()));
            }
        }
        read_if(j, "seed", c.seed);
        read_if(j, "out_dir", c.out_dir);
        read_if(j, "threads", c.threads);
        read_if(j, "calibration_frames", c.calibration_frames);
        if (j.contains("k_factor")) {
            c.k_factor = j.at("k_factor").is_null() ? std::nullopt
                                                    : std::optional<double>(j.at("k_factor").get<double>());
        }
        read_if(j, "k_per_pixel", c.k_per_pixel);
        if (j.contains("solver")) {
            reject_unknown_keys(j.at("solver"), {"regularization_eps"}, "solver");
            read_if(j.at("solver"), "regularization_eps", c.regularization_eps);
        }
        if (j.contains("metrics")) {
            reject_unknown_keys(j.at("metrics"), {"border_px"}, "metrics");
            read_if(j.at("metrics"), "border_px", c.border_px);
        }
        read_if(j, "images_per_point", c.images_per_point);
    } catch (const json::exception &e) {
        throw ConfigError(std::string("config: ") + e.what());
    }
    return c;
}

ExperimentConfig load_config(const std::filesystem::path &path) {
    std::ifstream in(path);
    if (!in) {
        throw ConfigError("cannot open config file " + path.string());
    }
    json j;
    try {
        in >> j;
    } catch (const json::exception &e) {
        throw ConfigError(path.string() + ": " + e.what());
    }
    return config_from_json(j);
}

std::string config_hash(const ExperimentConfig &config) {
    json j = to_json(config);
    j.erase("out_dir");
    j.erase("threads");
    std::string canonical = j.dump();
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char ch : canonical) {
        h ^= ch;
        h *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

}  // namespace tieq
