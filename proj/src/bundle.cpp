#include "hyperlens/bundle.hpp"

#include <bit>
#include <cmath>
#include <cstdint>
#include <fstream>

#include <json.hpp>

#include "hyperlens/errors.hpp"

namespace hyperlens {

namespace fs = std::filesystem;
using ordered_json = nlohmann::ordered_json;

namespace {

std::string slots_blob_name(const std::string& scene_id, int level) {
    return "slots_" + scene_id + "_" + std::to_string(level) + ".bin";
}

std::string masks_blob_name(const std::string& scene_id, int level) {
    return "masks_" + scene_id + "_" + std::to_string(level) + ".bin";
}

std::string planted_file_name(const std::string& scene_id) {
    return "planted_" + scene_id + ".json";
}

std::string pair_key(int coarse, int fine) {
    return std::to_string(coarse) + "-" + std::to_string(fine);
}

void require_safe_scene_id(const std::string& id) {
    if (id.empty()) throw InvalidInputError("scene id must be nonempty");
    for (char c : id) {
        const bool ok = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') ||
                        (c >= '0' && c <= '9') || c == '_' || c == '-';
        if (!ok)
            throw InvalidInputError("scene id '" + id +
                                    "' contains characters unsuitable for file names");
    }
}

// Payloads are raw float32, explicitly little-endian so bundles are portable
// across hosts. Bytes are assembled manually rather than memcpy'd.
void write_f32_le(std::ofstream& out, const std::vector<double>& values) {
    std::vector<unsigned char> buf(values.size() * 4);
    for (std::size_t i = 0; i < values.size(); ++i) {
        const auto u = std::bit_cast<std::uint32_t>(static_cast<float>(values[i]));
        buf[4 * i + 0] = static_cast<unsigned char>(u & 0xff);
        buf[4 * i + 1] = static_cast<unsigned char>((u >> 8) & 0xff);
        buf[4 * i + 2] = static_cast<unsigned char>((u >> 16) & 0xff);
        buf[4 * i + 3] = static_cast<unsigned char>((u >> 24) & 0xff);
    }
    out.write(reinterpret_cast<const char*>(buf.data()),
              static_cast<std::streamsize>(buf.size()));
}

std::vector<double> read_f32_le(const fs::path& file, std::size_t expected_count) {
    std::ifstream in(file, std::ios::binary);
    if (!in) throw IoError("missing blob: " + file.string());
    std::vector<unsigned char> buf(expected_count * 4);
    in.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
    const auto got = static_cast<std::size_t>(in.gcount());
    in.peek();
    if (got != buf.size() || !in.eof())
        throw FormatError("blob " + file.string() + ": expected exactly " +
                          std::to_string(buf.size()) + " bytes");
    std::vector<double> values(expected_count);
    for (std::size_t i = 0; i < expected_count; ++i) {
        const std::uint32_t u = static_cast<std::uint32_t>(buf[4 * i + 0]) |
                                (static_cast<std::uint32_t>(buf[4 * i + 1]) << 8) |
                                (static_cast<std::uint32_t>(buf[4 * i + 2]) << 16) |
                                (static_cast<std::uint32_t>(buf[4 * i + 3]) << 24);
        values[i] = static_cast<double>(std::bit_cast<float>(u));
    }
    return values;
}

void check_manifest(const BundleManifest& m) {
    if (m.format_version != 1)
        throw FormatError("unsupported format_version " + std::to_string(m.format_version));
    if (m.slot_dim == 0) throw FormatError("manifest: d_s must be >= 1");
    if (m.patch_count == 0) throw FormatError("manifest: L must be >= 1");
    if (m.levels.empty()) throw FormatError("manifest: levels must be nonempty");
    for (std::size_t i = 0; i + 1 < m.levels.size(); ++i)
        if (m.levels[i] >= m.levels[i + 1])
            throw FormatError("manifest: levels must be strictly ascending");
    if (m.levels.front() < 1) throw FormatError("manifest: levels must be >= 1");
    if (m.precision != "f32")
        throw FormatError("unsupported precision '" + m.precision + "'");
}

ordered_json manifest_to_json(const SlotBundle& bundle) {
    const auto& m = bundle.manifest;
    ordered_json j;
    j["format_version"] = m.format_version;
    j["d_s"] = m.slot_dim;
    j["L"] = m.patch_count;
    j["levels"] = m.levels;
    j["precision"] = m.precision;
    j["source"] = m.source;
    j["planted"] = m.planted;
    auto& scenes = j["scenes"] = ordered_json::array();
    for (const auto& scene : bundle.scenes) {
        ordered_json entry;
        entry["id"] = scene.id;
        ordered_json files;
        for (int level : m.levels) {
            ordered_json pair;
            pair["slots"] = slots_blob_name(scene.id, level);
            pair["masks"] = masks_blob_name(scene.id, level);
            files[std::to_string(level)] = pair;
        }
        entry["files"] = files;
        scenes.push_back(entry);
    }
    return j;
}

ordered_json planted_to_json(const PlantedTruth& planted) {
    ordered_json j;
    ordered_json parents;
    for (const auto& [pair, map] : planted.parents) parents[pair_key(pair.first, pair.second)] = map;
    j["parents"] = parents;
    ordered_json profile;
    for (const auto& [level, value] : planted.norm_profile) profile[std::to_string(level)] = value;
    j["norm_profile"] = profile;
    return j;
}

PlantedTruth planted_from_json(const ordered_json& j, const std::string& context) {
    PlantedTruth planted;
    if (!j.contains("parents") || !j.at("parents").is_object())
        throw FormatError(context + ": planted block lacks a 'parents' object");
    for (const auto& [key, value] : j.at("parents").items()) {
        const auto dash = key.find('-');
        if (dash == std::string::npos)
            throw FormatError(context + ": bad level-pair key '" + key + "'");
        const int coarse = std::stoi(key.substr(0, dash));
        const int fine = std::stoi(key.substr(dash + 1));
        planted.parents[{coarse, fine}] = value.get<std::vector<int>>();
    }
    if (j.contains("norm_profile"))
        for (const auto& [key, value] : j.at("norm_profile").items())
            planted.norm_profile[std::stoi(key)] = value.get<double>();
    return planted;
}

void write_text_file(const fs::path& file, const std::string& text) {
    std::ofstream out(file, std::ios::binary);
    if (!out) throw IoError("cannot open for writing: " + file.string());
    out.write(text.data(), static_cast<std::streamsize>(text.size()));
    if (!out) throw IoError("write failed: " + file.string());
}

ordered_json parse_json_file(const fs::path& file) {
    std::ifstream in(file, std::ios::binary);
    if (!in) throw IoError("cannot open: " + file.string());
    try {
        return ordered_json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        throw FormatError(file.string() + ": " + e.what());
    }
}

BundleManifest manifest_from_json(const ordered_json& j) {
    BundleManifest m;
    try {
        m.format_version = j.at("format_version").get<int>();
        m.slot_dim = j.at("d_s").get<std::size_t>();
        m.patch_count = j.at("L").get<std::size_t>();
        m.levels = j.at("levels").get<std::vector<int>>();
        m.precision = j.at("precision").get<std::string>();
        if (j.contains("source")) m.source = j.at("source").get<std::string>();
        if (j.contains("planted")) m.planted = j.at("planted").get<bool>();
    } catch (const nlohmann::json::exception& e) {
        throw FormatError(std::string("manifest.json: ") + e.what());
    }
    return m;
}

} // namespace

void save_bundle(const SlotBundle& bundle, const fs::path& dir) {
    check_manifest(bundle.manifest);
    const auto& m = bundle.manifest;
    for (const auto& scene : bundle.scenes) {
        require_safe_scene_id(scene.id);
        for (int level : m.levels) {
            const auto it = scene.levels.find(level);
            if (it == scene.levels.end())
                throw InvalidInputError("scene '" + scene.id + "' is missing level " +
                                        std::to_string(level));
            const auto& data = it->second;
            const auto n = static_cast<std::size_t>(level);
            if (data.slots.rows != n || data.slots.cols != m.slot_dim)
                throw InvalidInputError("scene '" + scene.id + "' level " +
                                        std::to_string(level) + ": slot matrix shape mismatch");
            if (data.masks.rows != n || data.masks.cols != m.patch_count)
                throw InvalidInputError("scene '" + scene.id + "' level " +
                                        std::to_string(level) + ": mask matrix shape mismatch");
        }
        if (m.planted && !scene.planted)
            throw InvalidInputError("scene '" + scene.id +
                                    "': manifest declares planted truth but scene has none");
    }

    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw IoError("cannot create directory " + dir.string() + ": " + ec.message());

    write_text_file(dir / "manifest.json", manifest_to_json(bundle).dump(2) + "\n");

    for (const auto& scene : bundle.scenes) {
        for (int level : m.levels) {
            const auto& data = scene.levels.at(level);
            for (const auto& [name, matrix] :
                 {std::pair<std::string, const Matrix*>{slots_blob_name(scene.id, level),
                                                        &data.slots},
                  std::pair<std::string, const Matrix*>{masks_blob_name(scene.id, level),
                                                        &data.masks}}) {
                std::ofstream out(dir / name, std::ios::binary);
                if (!out) throw IoError("cannot open for writing: " + (dir / name).string());
                write_f32_le(out, matrix->data);
                if (!out) throw IoError("write failed: " + (dir / name).string());
            }
        }
        if (m.planted)
            write_text_file(dir / planted_file_name(scene.id),
                            planted_to_json(*scene.planted).dump(2) + "\n");
    }
}

SlotBundle load_bundle(const fs::path& dir) {
    if (!fs::exists(dir / "manifest.json"))
        throw IoError("no manifest.json under " + dir.string());

    SlotBundle bundle;
    const ordered_json mj = parse_json_file(dir / "manifest.json");
    bundle.manifest = manifest_from_json(mj);
    check_manifest(bundle.manifest);
    const auto& m = bundle.manifest;

    if (!mj.contains("scenes") || !mj.at("scenes").is_array())
        throw FormatError("manifest.json: missing 'scenes' array");

    std::vector<std::string> seen_ids;
    for (const auto& entry : mj.at("scenes")) {
        SceneRecord scene;
        try {
            scene.id = entry.at("id").get<std::string>();
        } catch (const nlohmann::json::exception& e) {
            throw FormatError(std::string("manifest.json scene entry: ") + e.what());
        }
        if (std::find(seen_ids.begin(), seen_ids.end(), scene.id) != seen_ids.end())
            throw FormatError("duplicate scene id '" + scene.id + "'");
        seen_ids.push_back(scene.id);

        for (int level : m.levels) {
            std::string slots_name = slots_blob_name(scene.id, level);
            std::string masks_name = masks_blob_name(scene.id, level);
            if (entry.contains("files")) {
                const auto& files = entry.at("files");
                const std::string key = std::to_string(level);
                if (!files.contains(key))
                    throw FormatError("scene '" + scene.id + "': manifest lists no files for level " +
                                      key);
                slots_name = files.at(key).at("slots").get<std::string>();
                masks_name = files.at(key).at("masks").get<std::string>();
            }
            const auto n = static_cast<std::size_t>(level);

            LevelData data;
            data.slots.rows = n;
            data.slots.cols = m.slot_dim;
            data.slots.data = read_f32_le(dir / slots_name, n * m.slot_dim);
            data.masks.rows = n;
            data.masks.cols = m.patch_count;
            data.masks.data = read_f32_le(dir / masks_name, n * m.patch_count);

            const std::string context =
                "scene '" + scene.id + "' level " + std::to_string(level);
            if (!all_finite(data.slots.data))
                throw FormatError(context + ": non-finite slot value");
            for (double w : data.masks.data) {
                if (!std::isfinite(w) || w < 0.0 || w > 1.0)
                    throw FormatError(context + ": mask value outside [0,1]");
            }
            scene.levels.emplace(level, std::move(data));
        }

        if (m.planted) {
            const fs::path pf = dir / planted_file_name(scene.id);
            if (!fs::exists(pf)) throw IoError("missing planted-truth file: " + pf.string());
            scene.planted = planted_from_json(parse_json_file(pf), "scene '" + scene.id + "'");
        }
        bundle.scenes.push_back(std::move(scene));
    }
    return bundle;
}

std::vector<ValidationIssue> validate_bundle_dir(const fs::path& dir) {
    std::vector<ValidationIssue> issues;
    if (!fs::exists(dir / "manifest.json")) {
        issues.push_back({"", 0, "no manifest.json under " + dir.string()});
        return issues;
    }

    ordered_json mj;
    BundleManifest m;
    try {
        mj = parse_json_file(dir / "manifest.json");
        m = manifest_from_json(mj);
        check_manifest(m);
    } catch (const Error& e) {
        issues.push_back({"", 0, e.what()});
        return issues;
    }
    if (!mj.contains("scenes") || !mj.at("scenes").is_array()) {
        issues.push_back({"", 0, "manifest.json: missing 'scenes' array"});
        return issues;
    }

    for (const auto& entry : mj.at("scenes")) {
        std::string id;
        try {
            id = entry.at("id").get<std::string>();
        } catch (const nlohmann::json::exception&) {
            issues.push_back({"", 0, "scene entry without an 'id'"});
            continue;
        }
        for (int level : m.levels) {
            const auto n = static_cast<std::size_t>(level);
            const struct {
                std::string name;
                std::size_t count;
                bool is_mask;
            } blobs[2] = {{slots_blob_name(id, level), n * m.slot_dim, false},
                          {masks_blob_name(id, level), n * m.patch_count, true}};
            for (const auto& blob : blobs) {
                std::vector<double> values;
                try {
                    values = read_f32_le(dir / blob.name, blob.count);
                } catch (const Error& e) {
                    issues.push_back({id, level, e.what()});
                    continue;
                }
                for (std::size_t i = 0; i < values.size(); ++i) {
                    const double v = values[i];
                    const auto slot = i / (blob.is_mask ? m.patch_count : m.slot_dim);
                    const auto col = i % (blob.is_mask ? m.patch_count : m.slot_dim);
                    if (!std::isfinite(v)) {
                        issues.push_back({id, level,
                                          blob.name + ": non-finite value at slot " +
                                              std::to_string(slot) + ", " +
                                              (blob.is_mask ? "patch " : "component ") +
                                              std::to_string(col)});
                    } else if (blob.is_mask && (v < 0.0 || v > 1.0)) {
                        issues.push_back({id, level,
                                          "mask value " + std::to_string(v) +
                                              " outside [0,1] at slot " + std::to_string(slot) +
                                              ", patch " + std::to_string(col)});
                    }
                }
            }
        }
        if (m.planted && !fs::exists(dir / planted_file_name(id)))
            issues.push_back({id, 0, "missing planted-truth file " + planted_file_name(id)});
    }
    return issues;
}

} // namespace hyperlens
