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

#include "tieq/io.h"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <vector>

#include "json.hpp"
#include "tieq/config.h"
#include "tieq/errors.h"

namespace tieq {
namespace {

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

std::ifstream open_input(const std::filesystem::path &path, std::ios::openmode mode = std::ios::in) {
    std::ifstream in(path, mode);
    if (!in) {
        throw std::runtime_error("cannot open " + path.string());
    }
    return in;
}

// Next whitespace-delimited PGM header token, collecting "# ..." comments on the way.
std::string next_token(std::istream &in, std::vector<std::string> &comments) {
    std::string token;
    while (true) {
        int c = in.peek();
        if (c == EOF) {
            break;
        }
        if (c == '#') {
            std::string line;
            std::getline(in, line);
            comments.push_back(line);
            continue;
        }
        if (std::isspace(c)) {
            in.get();
            if (!token.empty()) {
                break;
            }
            continue;
        }
        token.push_back(static_cast<char>(in.get()));
    }
    return token;
}

std::map<std::string, double> parse_tieq_comment(const std::vector<std::string> &comments) {
    std::map<std::string, double> out;
    for (const auto &line : comments) {
        std::istringstream ss(line);
        std::string hash, tag;
        ss >> hash >> tag;
        if (tag != "tieq") {
            continue;
        }
        std::string kv;
        while (ss >> kv) {
            auto eq = kv.find('=');
            if (eq != std::string::npos) {
                out[kv.substr(0, eq)] = std::stod(kv.substr(eq + 1));
            }
        }
    }
    return out;
}

}  // namespace

void write_text_file(const std::filesystem::path &path, const std::string &text) {
    if (path.has_parent_path()) {
        std::filesystem::create_directories(path.parent_path());
    }
    std::ofstream out(path, std::ios::binary);
    out << text;
    if (!out) {
        throw std::runtime_error("cannot write " + path.string());
    }
}

template <typename Tag>
void write_pgm(const RealMap<Tag> &map, const std::filesystem::path &path) {
    auto values = map.values();
    auto [lo_it, hi_it] = std::minmax_element(values.begin(), values.end());
    const double lo = *lo_it;
    const double hi = *hi_it;
    const double scale = hi > lo ? (hi - lo) / 65535.0 : 1.0;
    std::ostringstream header;
    header << "P5\n# tieq scale=" << format_double(scale) << " offset=" << format_double(lo)
           << " pitch_um=" << format_double(map.grid().pitch_um())
           << " wavelength_um=" << format_double(map.grid().wavelength_um()) << "\n"
           << map.grid().nx() << " " << map.grid().ny() << "\n65535\n";
    std::string data = header.str();
    data.reserve(data.size() + 2 * values.size());
    for (double v : values) {
        long count = std::lround((v - lo) / scale);
        count = std::clamp(count, 0L, 65535L);
        data.push_back(static_cast<char>((count >> 8) & 0xff));
        data.push_back(static_cast<char>(count & 0xff));
    }
    write_text_file(path, data);
}

template <typename Tag>
RealMap<Tag> read_pgm(const std::filesystem::path &path, double fallback_pitch_um, double fallback_wavelength_um) {
    auto in = open_input(path, std::ios::binary);
    std::vector<std::string> comments;
    if (next_token(in, comments) != "P5") {
        throw ConfigError(path.string() + ": not a binary PGM");
    }
    int nx = std::stoi(next_token(in, comments));
    int ny = std::stoi(next_token(in, comments));
    int maxval = std::stoi(next_token(in, comments));
    if (maxval <= 0 || maxval > 65535) {
        throw ConfigError(path.string() + ": unsupported PGM maxval");
    }
    auto meta = parse_tieq_comment(comments);
    double scale = meta.count("scale") ? meta["scale"] : 1.0;
    double offset = meta.count("offset") ? meta["offset"] : 0.0;
    double pitch = meta.count("pitch_um") ? meta["pitch_um"] : fallback_pitch_um;
    double wavelength = meta.count("wavelength_um") ? meta["wavelength_um"] : fallback_wavelength_um;
    Grid grid(nx, ny, pitch, wavelength);
    std::vector<double> values(grid.size());
    const bool wide = maxval > 255;
    for (auto &v : values) {
        int count;
        if (wide) {
            int hi = in.get();
            int lo = in.get();
            count = (hi << 8) | lo;
        } else {
            count = in.get();
        }
        if (!in) {
            throw ConfigError(path.string() + ": truncated PGM data");
        }
        v = offset + scale * count;
    }
    return RealMap<Tag>(grid, std::move(values));
}

template <typename Tag>
void write_csv(const RealMap<Tag> &map, const std::filesystem::path &path) {
    std::string text;
    const Grid &g = map.grid();
    for (int y = 0; y < g.ny(); ++y) {
        for (int x = 0; x < g.nx(); ++x) {
            if (x > 0) {
                text.push_back(',');
            }
            text += format_double(map.at(x, y));
        }
        text.push_back('\n');
    }
    write_text_file(path, text);
}

template <typename Tag>
RealMap<Tag> read_csv(const std::filesystem::path &path, double pitch_um, double wavelength_um) {
    auto in = open_input(path);
    std::vector<double> values;
    int nx = -1;
    int ny = 0;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty() || line == "\r") {
            continue;
        }
        std::istringstream ss(line);
        std::string cell;
        int count = 0;
        while (std::getline(ss, cell, ',')) {
            try {
                values.push_back(std::stod(cell));
            } catch (const std::exception &) {
                throw ConfigError(path.string() + ": malformed number '" + cell + "'");
            }
            ++count;
        }
        if (nx < 0) {
            nx = count;
        } else if (count != nx) {
            throw ConfigError(path.string() + ": ragged CSV rows");
        }
        ++ny;
    }
    return RealMap<Tag>(Grid(nx, ny, pitch_um, wavelength_um), std::move(values));
}

#define TIEQ_INSTANTIATE(TAG)                                                                  \
    template void write_pgm(const RealMap<TAG> &, const std::filesystem::path &);              \
    template RealMap<TAG> read_pgm(const std::filesystem::path &, double, double);             \
    template void write_csv(const RealMap<TAG> &, const std::filesystem::path &);              \
    template RealMap<TAG> read_csv(const std::filesystem::path &, double, double);

TIEQ_INSTANTIATE(PhaseTag)
TIEQ_INSTANTIATE(IntensityTag)
TIEQ_INSTANTIATE(CountsTag)
TIEQ_INSTANTIATE(DerivativeTag)

#undef TIEQ_INSTANTIATE

PhaseMap load_phase_map(const std::filesystem::path &path, double pitch_um, double wavelength_um) {
    auto ext = path.extension().string();
    if (ext == ".pgm") {
        return read_pgm<PhaseTag>(path, pitch_um, wavelength_um);
    }
    if (ext == ".csv") {
        return read_csv<PhaseTag>(path, pitch_um, wavelength_um);
    }
    throw ConfigError("phase map must be a .pgm or .csv file: " + path.string());
}

void write_twin_bundle(const TwinFrameSet &set, const SourceModel &source, const std::filesystem::path &dir) {
    std::filesystem::create_directories(dir);
    write_csv(set.signal, dir / "signal.csv");
    write_csv(set.idler, dir / "idler.csv");
    write_csv(set.mean_signal, dir / "mean_signal.csv");
    write_csv(set.mean_idler, dir / "mean_idler.csv");
    nlohmann::json manifest;
    manifest["seed"] = set.seed;
    manifest["source"] = source_to_json(source);
    manifest["grid"] = grid_to_json(set.signal.grid());
    manifest["idler_geometry"] = "point_reflected";
    manifest["files"] = {"signal.csv", "idler.csv", "mean_signal.csv", "mean_idler.csv"};
    write_text_file(dir / "manifest.json", manifest.dump(2) + "\n");
}

TwinBundle read_twin_bundle(const std::filesystem::path &dir) {
    auto in = open_input(dir / "manifest.json");
    nlohmann::json manifest;
    try {
        in >> manifest;
    } catch (const nlohmann::json::exception &e) {
        throw ConfigError(dir.string() + "/manifest.json: " + e.what());
    }
    Grid grid = grid_from_json(manifest.at("grid"));
    SourceModel source = source_from_json(manifest.at("source"));
    auto load = [&](const char *name) { return read_csv<CountsTag>(dir / name, grid.pitch_um(), grid.wavelength_um()); };
    auto load_mean = [&](const char *name) {
        return read_csv<IntensityTag>(dir / name, grid.pitch_um(), grid.wavelength_um());
    };
    TwinFrameSet frames{load("signal.csv"), load("idler.csv"), load_mean("mean_signal.csv"),
                        load_mean("mean_idler.csv"), manifest.at("seed").get<std::uint64_t>()};
    require_same_grid(grid, frames.signal.grid(), "twin bundle");
    return TwinBundle{std::move(frames), source};
}

}  // namespace tieq
