#pragma once

// Space and map spec documents (JSON). A space is either a builtin reference
// or an explicit finite point list with a metric choice; a map is a builtin
// formula or an explicit pair table over a source truncation.

#include <cmath>
#include <memory>
#include <string>
#include <vector>

#include <json.hpp>

#include "coarse/coarse_map.hpp"
#include "coarse/errors.hpp"
#include "coarse/sequence.hpp"
#include "coarse/space.hpp"

namespace coarse {

namespace detail {

inline void validate_metric_matrix(const std::vector<double>& m, std::size_t n) {
    auto at = [&](std::size_t i, std::size_t j) { return m[i * n + j]; };
    for (std::size_t i = 0; i < n; ++i)
        if (std::abs(at(i, i)) > kTol)
            throw ValidationError("metric matrix: d(" + std::to_string(i) + "," +
                                  std::to_string(i) + ") must be 0");
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) {
            if (at(i, j) < -kTol)
                throw ValidationError("metric matrix: d(" + std::to_string(i) + "," +
                                      std::to_string(j) + ") is negative");
            if (std::abs(at(i, j) - at(j, i)) > kTol)
                throw ValidationError("metric matrix: asymmetric at (" + std::to_string(i) +
                                      "," + std::to_string(j) + ")");
        }
    for (std::size_t a = 0; a < n; ++a)
        for (std::size_t b = 0; b < n; ++b)
            for (std::size_t c = 0; c < n; ++c)
                if (at(a, c) > at(a, b) + at(b, c) + kTol)
                    throw ValidationError(
                        "metric matrix: triangle inequality fails on triple (" +
                        std::to_string(a) + "," + std::to_string(b) + "," +
                        std::to_string(c) + "): d(a,c) = " + std::to_string(at(a, c)) +
                        " > " + std::to_string(at(a, b) + at(b, c)));
}

}  // namespace detail

inline SpaceOracle parse_space_spec(const nlohmann::json& doc) {
    if (!doc.is_object()) throw ValidationError("space spec must be a JSON object");

    if (doc.contains("builtin")) {
        BuiltinParams params;
        if (doc.contains("params")) {
            const auto& p = doc.at("params");
            if (p.contains("eps")) params.eps = p.at("eps").get<double>();
            if (p.contains("k")) params.k = p.at("k").get<int>();
        }
        return builtin_space(doc.at("builtin").get<std::string>(), params);
    }

    if (!doc.contains("points"))
        throw ValidationError("space spec needs either \"builtin\" or \"points\"");
    const auto& pts = doc.at("points");
    if (!pts.is_array() || pts.empty())
        throw ValidationError("space spec: \"points\" must be a nonempty array");

    const std::size_t n = pts.size();
    const std::size_t dim = pts.at(0).is_array() ? pts.at(0).size() : 1;
    if (dim == 0) throw ValidationError("space spec: points need at least one coordinate");
    std::vector<double> coords;
    coords.reserve(n * dim);
    for (const auto& row : pts) {
        if (row.is_number()) {
            if (dim != 1) throw ValidationError("space spec: inconsistent point dimensions");
            coords.push_back(row.get<double>());
            continue;
        }
        if (!row.is_array() || row.size() != dim)
            throw ValidationError("space spec: inconsistent point dimensions");
        for (const auto& v : row) coords.push_back(v.get<double>());
    }

    MetricKind kind = MetricKind::Taxicab;
    std::vector<double> matrix;
    if (doc.contains("metric")) {
        const auto& m = doc.at("metric");
        if (m.is_string()) {
            const auto s = m.get<std::string>();
            if (s == "taxicab")
                kind = MetricKind::Taxicab;
            else if (s == "euclidean")
                kind = MetricKind::Euclidean;
            else
                throw ValidationError("space spec: unknown metric \"" + s + "\"");
        } else if (m.is_object() && m.contains("matrix")) {
            kind = MetricKind::Matrix;
            const auto& rows = m.at("matrix");
            if (rows.size() != n)
                throw ValidationError("space spec: metric matrix must be " +
                                      std::to_string(n) + "x" + std::to_string(n));
            for (const auto& row : rows) {
                if (row.size() != n)
                    throw ValidationError("space spec: metric matrix must be square");
                for (const auto& v : row) matrix.push_back(v.get<double>());
            }
            detail::validate_metric_matrix(matrix, n);
        } else {
            throw ValidationError("space spec: metric must be a name or {\"matrix\": ...}");
        }
    }

    PointId basepoint = 0;
    if (doc.contains("basepoint")) {
        basepoint = doc.at("basepoint").get<PointId>();
        if (basepoint < 0 || basepoint >= static_cast<PointId>(n))
            throw ValidationError("space spec: basepoint index out of range");
    }

    auto backend = std::make_shared<detail::Backend>("explicit", dim, kind,
                                                     std::move(coords), std::move(matrix));
    return SpaceOracle(std::move(backend), basepoint);
}

inline SpaceOracle load_space_spec(const std::string& text) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError(std::string("space spec: invalid JSON: ") + e.what());
    }
    try {
        return parse_space_spec(doc);
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError(std::string("space spec: ") + e.what());
    }
}

// Builds the witness over a fresh truncation of the declared source space.
inline CoarseMapWitness parse_map_spec(const nlohmann::json& doc, double r_max) {
    if (!doc.is_object()) throw ValidationError("map spec must be a JSON object");
    if (!doc.contains("source") || !doc.contains("target"))
        throw ValidationError("map spec needs \"source\" and \"target\" space specs");
    SpaceOracle source = parse_space_spec(doc.at("source"));
    SpaceOracle target = parse_space_spec(doc.at("target"));
    auto trunc = truncate_shared(source, r_max);

    if (doc.contains("builtin"))
        return builtin_map(doc.at("builtin").get<std::string>(), std::move(trunc), target);

    if (!doc.contains("pairs"))
        throw ValidationError("map spec needs either \"builtin\" or \"pairs\"");
    std::vector<PointId> table(trunc->size(), -1);
    for (const auto& pair : doc.at("pairs")) {
        if (!pair.is_array() || pair.size() != 2)
            throw ValidationError("map spec: each pair must be [source, target]");
        const PointId src = pair.at(0).get<PointId>();
        const PointId tgt = pair.at(1).get<PointId>();
        const auto i = trunc->index_of(src);
        if (!i)
            throw ValidationError("map spec: source point " + std::to_string(src) +
                                  " is outside the truncation");
        target.distance(tgt, tgt);  // id validity check
        table[*i] = tgt;
    }
    for (std::size_t i = 0; i < table.size(); ++i)
        if (table[i] < 0)
            throw ValidationError("map spec: no image for source point " +
                                  std::to_string(trunc->id(static_cast<Index>(i))));
    const std::string name =
        doc.contains("name") ? doc.at("name").get<std::string>() : "explicit-map";
    return CoarseMapWitness(name, std::move(trunc), std::move(target), std::move(table));
}

// Sequence literal for fixtures: {"space": <space spec>, "scale": N,
// "points": [<coords>, ...]}. Points are given by coordinates and resolved
// against the space; the result passes the usual gap validation.
inline NSequence parse_sequence_spec(const nlohmann::json& doc, const SpaceOracle& space) {
    if (!doc.contains("points") || !doc.contains("scale"))
        throw ValidationError("sequence literal needs \"points\" and \"scale\"");
    std::vector<PointId> points;
    for (const auto& row : doc.at("points")) {
        std::vector<double> coords;
        if (row.is_number())
            coords.push_back(row.get<double>());
        else
            for (const auto& v : row) coords.push_back(v.get<double>());
        const auto id = space.find_point(coords);
        if (!id)
            throw ValidationError("sequence literal: point " + row.dump() +
                                  " is not in " + space.name());
        points.push_back(*id);
    }
    return make_sequence(space, std::move(points), doc.at("scale").get<double>());
}

inline NSequence parse_sequence_spec(const nlohmann::json& doc) {
    if (!doc.contains("space"))
        throw ValidationError("sequence literal needs an embedded \"space\" spec");
    return parse_sequence_spec(doc, parse_space_spec(doc.at("space")));
}

inline CoarseMapWitness load_map_spec(const std::string& text, double r_max) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError(std::string("map spec: invalid JSON: ") + e.what());
    }
    try {
        return parse_map_spec(doc, r_max);
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError(std::string("map spec: ") + e.what());
    }
}

}  // namespace coarse
