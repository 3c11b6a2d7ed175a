#include "run_config.hpp"

#include "chfront/error.hpp"

#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

namespace chfront::cli {

namespace {

[[noreturn]] void bad(const std::string& field, const std::string& what) {
    throw Error(ErrorCode::ConfigError, "field '" + field + "': " + what);
}

void check_keys(const json& j, const std::string& where, const std::set<std::string>& allowed) {
    if (!j.is_object()) bad(where.empty() ? "<root>" : where, "expected an object");
    for (const auto& [key, value] : j.items()) {
        if (!allowed.count(key)) bad(where.empty() ? key : where + "." + key, "unknown field");
    }
}

template <class T>
void take(const json& j, const std::string& key, const std::string& path, T& out) {
    if (!j.contains(key)) return;
    const json& v = j.at(key);
    if constexpr (std::is_same_v<T, std::string>) {
        if (!v.is_string()) bad(path + key, "expected a string");
    } else if constexpr (std::is_integral_v<T>) {
        if (!v.is_number_integer()) bad(path + key, "expected an integer");
    } else {
        if (!v.is_number()) bad(path + key, "expected a number");
    }
    out = v.get<T>();
}

}  // namespace

SimConfig sim_config_from_json(const json& j) {
    check_keys(j, "", {"m", "domain_length", "n_modes", "dt", "t_end", "ic", "wedge", "snapshot_every",
                       "front_threshold", "noise", "seed"});
    if (!j.contains("m")) bad("m", "missing required field");
    SimConfig c;
    take(j, "m", "", c.m);
    take(j, "domain_length", "", c.domain_length);
    take(j, "n_modes", "", c.n_modes);
    take(j, "dt", "", c.dt);
    c.t_end = -1.0;
    take(j, "t_end", "", c.t_end);
    take(j, "snapshot_every", "", c.snapshot_every);
    take(j, "front_threshold", "", c.front_threshold);
    take(j, "noise", "", c.noise);
    take(j, "seed", "", c.seed);

    if (j.contains("ic")) {
        const json& ic = j.at("ic");
        if (!ic.is_object() || !ic.contains("type") || !ic.at("type").is_string()) bad("ic.type", "missing required field");
        const std::string type = ic.at("type").get<std::string>();
        if (type == "bump") {
            check_keys(ic, "ic", {"type", "amplitude", "width", "center"});
            LocalizedBump b;
            take(ic, "amplitude", "ic.", b.amplitude);
            take(ic, "width", "ic.", b.width);
            take(ic, "center", "ic.", b.center);
            c.ic = b;
        } else if (type == "mode") {
            check_keys(ic, "ic", {"type", "q", "amplitude"});
            SingleMode s;
            take(ic, "q", "ic.", s.q);
            take(ic, "amplitude", "ic.", s.amplitude);
            c.ic = s;
        } else if (type == "file") {
            check_keys(ic, "ic", {"type", "path"});
            if (!ic.contains("path")) bad("ic.path", "missing required field");
            CustomIC f;
            take(ic, "path", "ic.", f.path);
            c.ic = f;
        } else {
            bad("ic.type", "expected one of bump, mode, file");
        }
    }
    if (j.contains("wedge")) {
        const json& w = j.at("wedge");
        if (w.is_null()) {
            c.wedge.reset();
        } else {
            check_keys(w, "wedge", {"pre_speed", "margin", "buffer", "ramp", "every"});
            WedgeConfig wc;
            take(w, "pre_speed", "wedge.", wc.pre_speed);
            take(w, "margin", "wedge.", wc.margin);
            take(w, "buffer", "wedge.", wc.buffer);
            take(w, "ramp", "wedge.", wc.ramp);
            take(w, "every", "wedge.", wc.every);
            c.wedge = wc;
        }
    }
    if (c.t_end < 0.0) c.t_end = default_t_end(c.m, c.domain_length);
    c.validate();
    return c;
}

json to_json(const SimConfig& c) {
    json j = {{"m", c.m},
              {"domain_length", c.domain_length},
              {"n_modes", c.n_modes},
              {"dt", c.dt},
              {"t_end", c.t_end},
              {"snapshot_every", c.snapshot_every},
              {"front_threshold", c.front_threshold},
              {"noise", c.noise},
              {"seed", c.seed}};
    if (const auto* b = std::get_if<LocalizedBump>(&c.ic)) {
        j["ic"] = {{"type", "bump"}, {"amplitude", b->amplitude}, {"width", b->width}, {"center", b->center}};
    } else if (const auto* s = std::get_if<SingleMode>(&c.ic)) {
        j["ic"] = {{"type", "mode"}, {"q", s->q}, {"amplitude", s->amplitude}};
    } else {
        j["ic"] = {{"type", "file"}, {"path", std::get<CustomIC>(c.ic).path}};
    }
    if (c.wedge) {
        j["wedge"] = {{"pre_speed", c.wedge->pre_speed},
                      {"margin", c.wedge->margin},
                      {"buffer", c.wedge->buffer},
                      {"ramp", c.wedge->ramp},
                      {"every", c.wedge->every}};
    } else {
        j["wedge"] = nullptr;
    }
    return j;
}

json read_config_file(const std::filesystem::path& file) {
    std::ifstream is(file);
    if (!is) throw Error(ErrorCode::ConfigError, "cannot open " + file.string());
    json j;
    try {
        j = json::parse(is);
    } catch (const json::parse_error& e) {
        throw Error(ErrorCode::ConfigError, file.string() + ": " + e.what());
    }
    if (j.is_object() && j.contains("command") && j.contains("config")) return j.at("config");
    return j;
}

std::string config_hash(const json& config) {
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char ch : config.dump()) {
        h ^= ch;
        h *= 1099511628211ull;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

void write_text_atomic(const std::filesystem::path& file, const std::string& text) {
    auto tmp = file;
    tmp += ".tmp";
    {
        std::ofstream os(tmp);
        os << text;
        if (!os) throw Error(ErrorCode::ConfigError, "cannot write " + tmp.string());
    }
    std::filesystem::rename(tmp, file);
}

void write_manifest(const std::filesystem::path& dir, const std::string& command, const json& config,
                    std::uint64_t seed) {
    std::filesystem::create_directories(dir);
    const json m = {{"command", command},
                    {"output_dir", std::filesystem::absolute(dir).string()},
                    {"seed", seed},
                    {"config", config},
                    {"config_hash", config_hash(config)},
                    {"version", "0.1.0"}};
    write_text_atomic(dir / "manifest.json", m.dump(2) + "\n");
}

}  // namespace chfront::cli
