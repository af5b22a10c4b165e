#include "awblstm/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>

#include <json.hpp>

#include "awblstm/errors.hpp"

namespace awblstm {

using nlohmann::json;

namespace {

std::uint64_t fnv1a64(const unsigned char* data, std::size_t n) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (std::size_t i = 0; i < n; ++i) {
        h ^= data[i];
        h *= 0x100000001b3ULL;
    }
    return h;
}

void put_u32(std::string& out, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}

void put_u64(std::string& out, std::uint64_t v) {
    for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}

std::uint32_t get_u32(const unsigned char* p) {
    std::uint32_t v = 0;
    for (int i = 3; i >= 0; --i) v = (v << 8) | p[i];
    return v;
}

std::uint64_t get_u64(const unsigned char* p) {
    std::uint64_t v = 0;
    for (int i = 7; i >= 0; --i) v = (v << 8) | p[i];
    return v;
}

void put_double(std::string& out, double d) {
    put_u64(out, std::bit_cast<std::uint64_t>(d));
}

double get_double(const unsigned char* p) { return std::bit_cast<double>(get_u64(p)); }

}  // namespace

void save_checkpoint(const std::string& path, const ModelConfig& config,
                     const Vocabulary& vocab, const ModelParams& params) {
    auto named = named_params(params);

    json manifest = json::array();
    std::size_t offset = 0;  // in doubles, relative to the payload start
    for (const auto& [name, tensor] : named) {
        manifest.push_back(
            {{"name", name}, {"shape", tensor->shape()}, {"offset", offset}});
        offset += tensor->size();
    }
    json header;
    header["config"] = json::parse(config.to_json());
    header["vocabulary"] = json::parse(vocab.to_json());
    header["tensors"] = std::move(manifest);
    header["payload_doubles"] = offset;
    const std::string header_text = header.dump();

    std::string blob;
    blob.reserve(16 + header_text.size() + offset * 8 + 8);
    blob.append(kCheckpointMagic, 4);
    put_u32(blob, kCheckpointVersion);
    put_u64(blob, header_text.size());
    blob += header_text;
    const std::size_t payload_start = blob.size();
    for (const auto& [name, tensor] : named) {
        (void)name;
        for (std::size_t i = 0; i < tensor->size(); ++i) {
            put_double(blob, tensor->data()[i]);
        }
    }
    const std::uint64_t checksum = fnv1a64(
        reinterpret_cast<const unsigned char*>(blob.data()) + payload_start,
        blob.size() - payload_start);
    put_u64(blob, checksum);

    std::ofstream out(path, std::ios::binary);
    if (!out) throw ValidationError("cannot open '" + path + "' for writing");
    out.write(blob.data(), static_cast<std::streamsize>(blob.size()));
    if (!out) throw ValidationError("short write to '" + path + "'");
}

LoadedModel load_checkpoint(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IntegrityError("cannot open checkpoint '" + path + "'");
    std::string blob((std::istreambuf_iterator<char>(in)),
                     std::istreambuf_iterator<char>());
    const auto* bytes = reinterpret_cast<const unsigned char*>(blob.data());

    if (blob.size() < 16 || std::memcmp(blob.data(), kCheckpointMagic, 4) != 0) {
        throw IntegrityError("'" + path + "' is not a checkpoint (bad magic)");
    }
    const std::uint32_t version = get_u32(bytes + 4);
    if (version != kCheckpointVersion) {
        throw VersionError("checkpoint format version " + std::to_string(version) +
                           " is not supported (expected " +
                           std::to_string(kCheckpointVersion) + ")");
    }
    const std::uint64_t header_len = get_u64(bytes + 8);
    if (blob.size() < 16 + header_len + 8) {
        throw IntegrityError("checkpoint '" + path + "' is truncated");
    }
    json header;
    try {
        header = json::parse(blob.substr(16, header_len));
    } catch (const json::parse_error& e) {
        throw IntegrityError(std::string("checkpoint header is not valid JSON: ") +
                             e.what());
    }

    LoadedModel model;
    std::uint64_t payload_doubles = 0;
    try {
        model.config = ModelConfig::from_json(header.at("config").dump());
        model.vocab = Vocabulary::from_json(header.at("vocabulary").dump());
        payload_doubles = header.at("payload_doubles").get<std::uint64_t>();
    } catch (const json::exception& e) {
        throw IntegrityError(std::string("checkpoint header is incomplete: ") + e.what());
    }

    const std::size_t payload_start = 16 + header_len;
    const std::size_t payload_bytes = payload_doubles * 8;
    if (blob.size() != payload_start + payload_bytes + 8) {
        throw IntegrityError("checkpoint '" + path + "' is truncated");
    }
    const std::uint64_t stored = get_u64(bytes + payload_start + payload_bytes);
    const std::uint64_t actual = fnv1a64(bytes + payload_start, payload_bytes);
    if (stored != actual) {
        throw IntegrityError("checkpoint payload checksum mismatch");
    }

    model.params = ModelParams::init(model.config, model.vocab);
    auto named = named_params(model.params);
    std::size_t consumed = 0;
    for (const auto& entry : header.at("tensors")) {
        const std::string name = entry.at("name").get<std::string>();
        const std::vector<std::size_t> shape =
            entry.at("shape").get<std::vector<std::size_t>>();
        const std::size_t offset = entry.at("offset").get<std::size_t>();

        Tensor* target = nullptr;
        for (auto& [pname, tensor] : named) {
            if (pname == name) target = tensor;
        }
        if (!target) {
            throw ValidationError("checkpoint tensor '" + name +
                                  "' does not exist in this configuration");
        }
        if (target->shape() != shape) {
            Tensor probe(shape);
            throw ValidationError("checkpoint tensor '" + name + "' has shape " +
                                  probe.shape_str() + " but the configuration implies " +
                                  target->shape_str());
        }
        if (offset + target->size() > payload_doubles) {
            throw IntegrityError("checkpoint tensor '" + name +
                                 "' points outside the payload");
        }
        const unsigned char* src = bytes + payload_start + offset * 8;
        for (std::size_t i = 0; i < target->size(); ++i) {
            target->data()[i] = get_double(src + i * 8);
        }
        consumed += target->size();
    }
    if (consumed != payload_doubles) {
        throw ValidationError(
            "checkpoint manifest does not cover this configuration's parameters");
    }
    return model;
}

}  // namespace awblstm
