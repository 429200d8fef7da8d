#pragma once

#include <cmath>
#include <fstream>
#include <stdexcept>
#include <string>

#include <json.hpp>

#include "bwshare/scenario.hpp"

namespace bwshare {

inline constexpr int kScenarioSchemaVersion = 1;

namespace detail {

inline Point pointFromJson(const nlohmann::json& j, const std::string& field)
{
    if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number())
        throw std::invalid_argument(field + ": expected [x, y]");
    return {j[0].get<double>(), j[1].get<double>()};
}

inline nlohmann::json pointToJson(const Point& p) { return nlohmann::json::array({p.x, p.y}); }

template <class T>
T require(const nlohmann::json& j, const std::string& field)
{
    if (!j.contains(field))
        throw std::invalid_argument(field + ": missing");
    try {
        return j.at(field).get<T>();
    } catch (const nlohmann::json::exception&) {
        throw std::invalid_argument(field + ": wrong type");
    }
}

} // namespace detail

/// Parse a scenario document. The layout is either explicit
/// {"positions": [[x,y],...], "txPowers": [...], "servingIndex": n}
/// or the grid shorthand {"grid": {"count": n, "spacing": s}, "txPower": w}
/// (odd count, serving station at the center). Roads give entry, exit and a
/// segment count; the exit must sit exactly segments * velocity * slotSeconds
/// down the road from the entry.
inline Scenario parseScenario(const nlohmann::json& j)
{
    using detail::pointFromJson;
    using detail::require;

    if (require<int>(j, "schemaVersion") != kScenarioSchemaVersion)
        throw std::invalid_argument("schemaVersion: unsupported");

    Scenario s;
    if (!j.contains("layout"))
        throw std::invalid_argument("layout: missing");
    const nlohmann::json& jl = j.at("layout");
    if (jl.contains("grid")) {
        const nlohmann::json& jg = jl.at("grid");
        const int count = require<int>(jg, "count");
        const double spacing = require<double>(jg, "spacing");
        if (count < 1 || count % 2 == 0)
            throw std::invalid_argument("layout.grid.count: must be a positive odd number");
        if (!(spacing > 0.0))
            throw std::invalid_argument("layout.grid.spacing: must be > 0");
        const int half = count / 2;
        for (int i = -half; i <= half; ++i)
            for (int k = -half; k <= half; ++k)
                s.layout.positions.push_back({spacing * i, spacing * k});
        const double power = jl.value("txPower", 1.0);
        s.layout.txPowers.assign(s.layout.positions.size(), power);
        s.layout.servingIndex = static_cast<std::size_t>(half * count + half);
    } else {
        if (!jl.contains("positions"))
            throw std::invalid_argument("layout.positions: missing");
        for (const auto& jp : jl.at("positions"))
            s.layout.positions.push_back(pointFromJson(jp, "layout.positions"));
        s.layout.txPowers = require<std::vector<double>>(jl, "txPowers");
        s.layout.servingIndex = require<std::size_t>(jl, "servingIndex");
    }

    s.prop.pathLossExponent = j.value("pathLossExponent", 4.0);
    s.prop.minDistance = j.value("minDistance", 0.5);

    const auto bounds = require<std::vector<double>>(j, "cellBounds");
    if (bounds.size() != 4)
        throw std::invalid_argument("cellBounds: expected [xmin, xmax, ymin, ymax]");
    s.cellBounds = {bounds[0], bounds[1], bounds[2], bounds[3]};

    if (!j.contains("staticUsers"))
        throw std::invalid_argument("staticUsers: missing");
    for (const auto& jp : j.at("staticUsers"))
        s.staticUsers.push_back(pointFromJson(jp, "staticUsers"));

    s.slotSeconds = require<double>(j, "slotSeconds");
    s.velocity = require<double>(j, "velocity");

    if (!j.contains("roads"))
        throw std::invalid_argument("roads: missing");
    for (const auto& jr : j.at("roads")) {
        Road r;
        r.entry = pointFromJson(jr.contains("entry") ? jr.at("entry") : nlohmann::json(),
                                "roads.entry");
        const Point exit = pointFromJson(jr.contains("exit") ? jr.at("exit") : nlohmann::json(),
                                         "roads.exit");
        r.segmentCount = require<int>(jr, "segments");
        if (r.segmentCount < 1)
            throw std::invalid_argument("roads.segments: must be >= 1");
        const double dx = exit.x - r.entry.x;
        const double dy = exit.y - r.entry.y;
        const double len = std::hypot(dx, dy);
        const double expected = r.segmentCount * s.velocity * s.slotSeconds;
        if (!(len > 0.0))
            throw std::invalid_argument("roads.exit: must differ from entry");
        if (std::fabs(len - expected) > 1e-6 * std::max(1.0, expected))
            throw std::invalid_argument(
                "roads: entry-exit length does not equal segments * velocity * slotSeconds");
        r.direction = {dx / len, dy / len};
        s.roads.push_back(r);
    }

    s.arrivalProb = require<std::vector<double>>(j, "arrivalProb");
    s.maxArrivalsPerSlot = j.value("maxArrivalsPerSlot", 1);

    if (j.contains("fading")) {
        const nlohmann::json& jf = j.at("fading");
        s.fading.gains = require<std::vector<double>>(jf, "gains");
        s.fading.transition = require<std::vector<std::vector<double>>>(jf, "transition");
    }

    s.validate();
    return s;
}

inline nlohmann::json scenarioToJson(const Scenario& s)
{
    using detail::pointToJson;
    nlohmann::json j;
    j["schemaVersion"] = kScenarioSchemaVersion;
    nlohmann::json jl;
    jl["positions"] = nlohmann::json::array();
    for (const Point& p : s.layout.positions)
        jl["positions"].push_back(pointToJson(p));
    jl["txPowers"] = s.layout.txPowers;
    jl["servingIndex"] = s.layout.servingIndex;
    j["layout"] = jl;
    j["pathLossExponent"] = s.prop.pathLossExponent;
    j["minDistance"] = s.prop.minDistance;
    j["cellBounds"] = {s.cellBounds.xmin, s.cellBounds.xmax, s.cellBounds.ymin, s.cellBounds.ymax};
    j["staticUsers"] = nlohmann::json::array();
    for (const Point& p : s.staticUsers)
        j["staticUsers"].push_back(pointToJson(p));
    j["slotSeconds"] = s.slotSeconds;
    j["velocity"] = s.velocity;
    j["roads"] = nlohmann::json::array();
    for (const Road& r : s.roads) {
        const double len = r.segmentCount * s.segmentLength();
        nlohmann::json jr;
        jr["entry"] = pointToJson(r.entry);
        jr["exit"] = pointToJson({r.entry.x + r.direction.x * len, r.entry.y + r.direction.y * len});
        jr["segments"] = r.segmentCount;
        j["roads"].push_back(jr);
    }
    j["arrivalProb"] = s.arrivalProb;
    j["maxArrivalsPerSlot"] = s.maxArrivalsPerSlot;
    nlohmann::json jf;
    jf["gains"] = s.fading.gains;
    jf["transition"] = s.fading.transition;
    j["fading"] = jf;
    return j;
}

inline Scenario loadScenario(const std::string& path)
{
    std::ifstream in(path);
    if (!in)
        throw std::runtime_error("cannot open scenario file: " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw std::invalid_argument("scenario parse error: " + std::string(e.what()));
    }
    return parseScenario(j);
}

inline void saveScenario(const Scenario& s, const std::string& path)
{
    std::ofstream out(path);
    if (!out)
        throw std::runtime_error("cannot open output file: " + path);
    out << scenarioToJson(s).dump(2) << '\n';
}

} // namespace bwshare
