#include "objmark/serialize.hpp"

#include <cstdio>
#include <fstream>

#include "objmark/error.hpp"

namespace objmark {

using nlohmann::json;

namespace {

template <typename T>
T field(const json& j, const char* name) {
    if (!j.contains(name)) {
        fail(Errc::invalid_argument, std::string("missing JSON field '") + name + "'");
    }
    try {
        return j.at(name).get<T>();
    } catch (const json::exception& e) {
        fail(Errc::invalid_argument, std::string("bad JSON field '") + name + "': " + e.what());
    }
}

}  // namespace

void to_json(json& j, const Point& p) { j = json::array({p.x, p.y}); }

void from_json(const json& j, Point& p) {
    if (!j.is_array() || j.size() != 2) {
        fail(Errc::invalid_argument, "a point is a two-element array");
    }
    p = {j[0].get<double>(), j[1].get<double>()};
}

void to_json(json& j, const SimilarityTransform& t) {
    j = json{{"translation", t.translation}, {"rotation", t.rotation}, {"scale", t.scale},
             {"pivot", t.pivot}};
}

void from_json(const json& j, SimilarityTransform& t) {
    t.translation = field<Point>(j, "translation");
    t.rotation = field<double>(j, "rotation");
    t.scale = field<double>(j, "scale");
    t.pivot = field<Point>(j, "pivot");
    t.validate();
}

void to_json(json& j, const SquareRect& r) { j = json{{"x0", r.x0}, {"y0", r.y0}, {"side", r.side}}; }

void from_json(const json& j, SquareRect& r) {
    r = {field<int>(j, "x0"), field<int>(j, "y0"), field<int>(j, "side")};
}

void to_json(json& j, const SyncRecord& r) {
    j = json{{"transform", r.transform},
             {"source_centroid", r.source_centroid},
             {"source_phi", r.source_phi},
             {"source_mbs", r.source_mbs},
             {"degenerate_orientation", r.degenerate_orientation}};
}

void from_json(const json& j, SyncRecord& r) {
    r.transform = field<SimilarityTransform>(j, "transform");
    r.source_centroid = field<Point>(j, "source_centroid");
    r.source_phi = field<double>(j, "source_phi");
    r.source_mbs = field<SquareRect>(j, "source_mbs");
    r.degenerate_orientation = field<bool>(j, "degenerate_orientation");
}

void to_json(json& j, const AttackSpec& a) {
    j = json{{"rotation", a.rotation},
             {"scale", a.scale},
             {"paste_offset", a.paste_offset},
             {"background_id", a.background_id}};
}

void from_json(const json& j, AttackSpec& a) {
    a.rotation = field<double>(j, "rotation");
    a.scale = field<double>(j, "scale");
    a.paste_offset = field<Point>(j, "paste_offset");
    a.background_id = j.value("background_id", 0);
}

void to_json(json& j, const AttackRanges& r) {
    j = json{{"rotation", json::array({r.rotation_min, r.rotation_max})},
             {"scale", json::array({r.scale_min, r.scale_max})}};
}

void from_json(const json& j, AttackRanges& r) {
    if (j.contains("rotation")) {
        const Point p = j.at("rotation").get<Point>();
        r.rotation_min = p.x;
        r.rotation_max = p.y;
    }
    if (j.contains("scale")) {
        const Point p = j.at("scale").get<Point>();
        r.scale_min = p.x;
        r.scale_max = p.y;
    }
    r.validate();
}

std::uint64_t parse_key(const std::string& text) {
    std::string digits = text;
    if (digits.size() > 2 && digits[0] == '0' && (digits[1] == 'x' || digits[1] == 'X')) {
        digits = digits.substr(2);
    }
    require(!digits.empty() && digits.size() <= 16, "key must be 1 to 16 hex digits");
    std::uint64_t key = 0;
    for (char ch : digits) {
        int v = -1;
        if (ch >= '0' && ch <= '9') {
            v = ch - '0';
        } else if (ch >= 'a' && ch <= 'f') {
            v = ch - 'a' + 10;
        } else if (ch >= 'A' && ch <= 'F') {
            v = ch - 'A' + 10;
        }
        require(v >= 0, "key '" + text + "' is not hexadecimal");
        key = (key << 4) | static_cast<std::uint64_t>(v);
    }
    return key;
}

std::uint64_t parse_key(const json& j) {
    if (j.is_string()) {
        return parse_key(j.get<std::string>());
    }
    require(j.is_number_unsigned() || (j.is_number_integer() && j.get<std::int64_t>() >= 0),
            "key must be a hex string or a non-negative integer");
    return j.get<std::uint64_t>();
}

std::string format_key(std::uint64_t key) {
    char buf[24];
    std::snprintf(buf, sizeof buf, "0x%016llx", static_cast<unsigned long long>(key));
    return buf;
}

json read_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        fail(Errc::io, "cannot open '" + path + "'");
    }
    try {
        return json::parse(in);
    } catch (const json::parse_error& e) {
        fail(Errc::invalid_argument, "'" + path + "' is not valid JSON: " + e.what());
    }
}

}  // namespace objmark
