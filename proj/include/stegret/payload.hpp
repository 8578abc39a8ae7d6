#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "stegret/error.hpp"

namespace stegret {

/// The semantics embedded inside an image: a class label, retrieval keywords,
/// a free-text description, and optional (key, value) attribute pairs.
struct SemanticRecord {
    std::string class_label;
    std::vector<std::string> keywords;
    std::string description;
    std::vector<std::pair<std::string, std::string>> attributes;

    bool operator==(const SemanticRecord&) const = default;

    void validate() const {
        if (class_label.empty())
            raise(Errc::invalid_record, "class label must be nonempty");
        if (class_label.size() > 64)
            raise(Errc::invalid_record, "class label exceeds 64 bytes");
    }
};

struct EncryptionKey {
    std::string passphrase;
    void validate() const {
        if (passphrase.empty()) raise(Errc::invalid_record, "encryption key must be nonempty");
    }
};

struct StegoKey {
    std::string passphrase;
    void validate() const {
        if (passphrase.empty()) raise(Errc::invalid_record, "stego key must be nonempty");
    }
};

// ---------------------------------------------------------------------------
// Hashing and integrity primitives. These constants are wire-format contract:
// a compatible extractor in any language must reproduce them bit for bit.

inline std::uint64_t fnv1a64(const void* data, std::size_t n) {
    const auto* p = static_cast<const std::uint8_t*>(data);
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (std::size_t i = 0; i < n; ++i) {
        h ^= p[i];
        h *= 0x100000001b3ull;
    }
    return h;
}

inline std::uint64_t fnv1a64(const std::string& s) { return fnv1a64(s.data(), s.size()); }

namespace payload_detail {

inline const std::array<std::uint32_t, 256>& crc32_table() {
    static const std::array<std::uint32_t, 256> table = [] {
        std::array<std::uint32_t, 256> t{};
        for (std::uint32_t i = 0; i < 256; ++i) {
            std::uint32_t c = i;
            for (int k = 0; k < 8; ++k)
                c = (c & 1) ? (0xEDB88320u ^ (c >> 1)) : (c >> 1);
            t[i] = c;
        }
        return t;
    }();
    return table;
}

} // namespace payload_detail

/// Reflected CRC-32 (polynomial 0xEDB88320, init and final xor 0xFFFFFFFF).
inline std::uint32_t crc32(const std::uint8_t* data, std::size_t n) {
    const auto& table = payload_detail::crc32_table();
    std::uint32_t c = 0xFFFFFFFFu;
    for (std::size_t i = 0; i < n; ++i)
        c = table[(c ^ data[i]) & 0xFF] ^ (c >> 8);
    return c ^ 0xFFFFFFFFu;
}

inline std::uint32_t crc32(const std::vector<std::uint8_t>& data) {
    return crc32(data.data(), data.size());
}

// ---------------------------------------------------------------------------
// Record serialization: 2-byte big-endian field count, then per field a
// 1-byte tag (1=class, 2=keyword, 3=description, 4=attribute key,
// 5=attribute value), 2-byte big-endian length, raw bytes. The class and
// description fields are always emitted (possibly with length 0 for the
// description); keywords and attribute pairs are emitted as present.

namespace payload_detail {

constexpr std::uint8_t kTagClass = 1;
constexpr std::uint8_t kTagKeyword = 2;
constexpr std::uint8_t kTagDescription = 3;
constexpr std::uint8_t kTagAttrKey = 4;
constexpr std::uint8_t kTagAttrValue = 5;

inline void put_field(std::vector<std::uint8_t>& out, std::uint8_t tag, const std::string& v) {
    if (v.size() > 0xFFFF)
        raise(Errc::field_too_long, "record field exceeds 65535 bytes");
    out.push_back(tag);
    out.push_back(static_cast<std::uint8_t>(v.size() >> 8));
    out.push_back(static_cast<std::uint8_t>(v.size() & 0xFF));
    out.insert(out.end(), v.begin(), v.end());
}

} // namespace payload_detail

inline std::vector<std::uint8_t> serialize_record(const SemanticRecord& rec) {
    using namespace payload_detail;
    rec.validate();
    const std::size_t field_count = 2 + rec.keywords.size() + 2 * rec.attributes.size();
    if (field_count > 0xFFFF)
        raise(Errc::field_too_long, "record has too many fields");
    std::vector<std::uint8_t> out;
    out.push_back(static_cast<std::uint8_t>(field_count >> 8));
    out.push_back(static_cast<std::uint8_t>(field_count & 0xFF));
    put_field(out, kTagClass, rec.class_label);
    for (const auto& kw : rec.keywords) put_field(out, kTagKeyword, kw);
    put_field(out, kTagDescription, rec.description);
    for (const auto& [k, v] : rec.attributes) {
        put_field(out, kTagAttrKey, k);
        put_field(out, kTagAttrValue, v);
    }
    return out;
}

inline SemanticRecord deserialize_record(const std::vector<std::uint8_t>& data) {
    using namespace payload_detail;
    std::size_t pos = 0;
    const auto need = [&](std::size_t n) {
        if (pos + n > data.size())
            raise(Errc::malformed_payload, "record truncated");
    };
    need(2);
    const std::size_t field_count = (static_cast<std::size_t>(data[0]) << 8) | data[1];
    pos = 2;

    SemanticRecord rec;
    bool have_class = false, have_description = false;
    std::string pending_attr_key;
    bool have_pending_key = false;
    for (std::size_t f = 0; f < field_count; ++f) {
        need(3);
        const std::uint8_t tag = data[pos];
        const std::size_t len = (static_cast<std::size_t>(data[pos + 1]) << 8) | data[pos + 2];
        pos += 3;
        need(len);
        std::string value(data.begin() + static_cast<std::ptrdiff_t>(pos),
                          data.begin() + static_cast<std::ptrdiff_t>(pos + len));
        pos += len;

        if (have_pending_key && tag != kTagAttrValue)
            raise(Errc::malformed_payload, "attribute key without value");
        switch (tag) {
            case kTagClass:
                if (have_class) raise(Errc::malformed_payload, "duplicate class field");
                rec.class_label = std::move(value);
                have_class = true;
                break;
            case kTagKeyword:
                rec.keywords.push_back(std::move(value));
                break;
            case kTagDescription:
                if (have_description) raise(Errc::malformed_payload, "duplicate description field");
                rec.description = std::move(value);
                have_description = true;
                break;
            case kTagAttrKey:
                pending_attr_key = std::move(value);
                have_pending_key = true;
                break;
            case kTagAttrValue:
                if (!have_pending_key)
                    raise(Errc::malformed_payload, "attribute value without key");
                rec.attributes.emplace_back(std::move(pending_attr_key), std::move(value));
                have_pending_key = false;
                break;
            default:
                raise(Errc::malformed_payload, "unknown record field tag");
        }
    }
    if (pos != data.size())
        raise(Errc::malformed_payload, "trailing bytes after record");
    if (have_pending_key)
        raise(Errc::malformed_payload, "attribute key without value");
    if (!have_class || !have_description)
        raise(Errc::malformed_payload, "record missing mandatory fields");
    rec.validate();
    return rec;
}

// ---------------------------------------------------------------------------
// Four-way split, keystream cipher, and the keyed quadrant permutation.

/// Contiguous quarters with q = ceil(n/4): block i gets bytes
/// [i*q, min((i+1)*q, n)). Concatenation reproduces the input.
inline std::array<std::vector<std::uint8_t>, 4> split_blocks(
    const std::vector<std::uint8_t>& data) {
    const std::size_t n = data.size();
    const std::size_t q = (n + 3) / 4;
    std::array<std::vector<std::uint8_t>, 4> blocks;
    for (std::size_t i = 0; i < 4; ++i) {
        const std::size_t lo = std::min(i * q, n);
        const std::size_t hi = std::min((i + 1) * q, n);
        blocks[i].assign(data.begin() + static_cast<std::ptrdiff_t>(lo),
                         data.begin() + static_cast<std::ptrdiff_t>(hi));
    }
    return blocks;
}

/// Deterministic per-block keystream: seed = FNV-1a-64(key) xor
/// ((block_index+1) * 0x9E3779B97F4A7C15), zero seed replaced by the golden
/// constant, then one xorshift64* step per output byte (the high byte of the
/// scrambled state). Obfuscation, not cryptography: the construction is a
/// bit-exact format contract, documented in docs/FORMAT.md.
inline std::vector<std::uint8_t> keystream(const EncryptionKey& key, int block_index,
                                           std::size_t n) {
    key.validate();
    std::uint64_t seed = fnv1a64(key.passphrase) ^
                         (static_cast<std::uint64_t>(block_index + 1) * 0x9E3779B97F4A7C15ull);
    if (seed == 0) seed = 0x9E3779B97F4A7C15ull;
    std::vector<std::uint8_t> out(n);
    std::uint64_t s = seed;
    for (std::size_t i = 0; i < n; ++i) {
        s ^= s >> 12;
        s ^= s << 25;
        s ^= s >> 27;
        out[i] = static_cast<std::uint8_t>((s * 0x2545F4914F6CDD1Dull) >> 56);
    }
    return out;
}

namespace payload_detail {

inline std::uint8_t rotl8(std::uint8_t v, int r) {
    r &= 7;
    return static_cast<std::uint8_t>((v << r) | (v >> (8 - r))) & 0xFF;
}
inline std::uint8_t rotr8(std::uint8_t v, int r) {
    r &= 7;
    return static_cast<std::uint8_t>((v >> r) | (v << (8 - r))) & 0xFF;
}

} // namespace payload_detail

/// ciphertext[i] = rotl(block[i] xor keystream[i], (block_index+1) mod 8)
inline std::vector<std::uint8_t> encrypt_block(const std::vector<std::uint8_t>& block,
                                               const EncryptionKey& key, int block_index) {
    const auto ks = keystream(key, block_index, block.size());
    const int rot = (block_index + 1) % 8;
    std::vector<std::uint8_t> out(block.size());
    for (std::size_t i = 0; i < block.size(); ++i)
        out[i] = payload_detail::rotl8(block[i] ^ ks[i], rot);
    return out;
}

inline std::vector<std::uint8_t> decrypt_block(const std::vector<std::uint8_t>& block,
                                               const EncryptionKey& key, int block_index) {
    const auto ks = keystream(key, block_index, block.size());
    const int rot = (block_index + 1) % 8;
    std::vector<std::uint8_t> out(block.size());
    for (std::size_t i = 0; i < block.size(); ++i)
        out[i] = payload_detail::rotr8(block[i], rot) ^ ks[i];
    return out;
}

/// The index-th permutation of (0,1,2,3) in lexicographic order, 0..23.
inline std::array<int, 4> nth_permutation(int index) {
    std::array<int, 4> pool{0, 1, 2, 3};
    std::array<int, 4> out{};
    static constexpr int fact[4] = {6, 2, 1, 1};
    int remaining = 4;
    for (int pos = 0; pos < 4; ++pos) {
        const int pick = index / fact[pos];
        index %= fact[pos];
        out[pos] = pool[pick];
        for (int j = pick; j < remaining - 1; ++j) pool[j] = pool[j + 1];
        --remaining;
    }
    return out;
}

/// Message block i is embedded into image quadrant perm[i]. The stego key's
/// entire effect is this permutation choice.
inline std::array<int, 4> quadrant_permutation(const StegoKey& key) {
    key.validate();
    return nth_permutation(static_cast<int>(fnv1a64(key.passphrase) % 24));
}

// ---------------------------------------------------------------------------
// Payload header: the fixed 34-byte plaintext block that bootstraps
// extraction. Laid out big-endian; 34 bytes = 272 bits.

struct PayloadHeader {
    static constexpr std::array<std::uint8_t, 4> kMagic{'E', 'S', 'H', '1'};
    static constexpr std::uint8_t kVersion = 1;
    static constexpr std::size_t kEncodedSize = 34;
    static constexpr std::size_t kBits = kEncodedSize * 8;

    std::uint8_t flags = 0; // bit0 = payload present
    std::uint32_t total_len = 0;
    std::array<std::uint32_t, 4> block_lens{};
    std::uint32_t record_crc = 0;

    bool payload_present() const { return (flags & 1) != 0; }
};

namespace payload_detail {

inline void put_be32(std::vector<std::uint8_t>& out, std::uint32_t v) {
    out.push_back(static_cast<std::uint8_t>(v >> 24));
    out.push_back(static_cast<std::uint8_t>(v >> 16));
    out.push_back(static_cast<std::uint8_t>(v >> 8));
    out.push_back(static_cast<std::uint8_t>(v));
}
inline std::uint32_t be32(const std::uint8_t* p) {
    return (static_cast<std::uint32_t>(p[0]) << 24) | (static_cast<std::uint32_t>(p[1]) << 16) |
           (static_cast<std::uint32_t>(p[2]) << 8) | static_cast<std::uint32_t>(p[3]);
}

} // namespace payload_detail

inline std::vector<std::uint8_t> encode_header(const PayloadHeader& h) {
    using namespace payload_detail;
    std::vector<std::uint8_t> out;
    out.reserve(PayloadHeader::kEncodedSize);
    out.insert(out.end(), PayloadHeader::kMagic.begin(), PayloadHeader::kMagic.end());
    out.push_back(PayloadHeader::kVersion);
    out.push_back(h.flags);
    put_be32(out, h.total_len);
    for (std::uint32_t len : h.block_lens) put_be32(out, len);
    put_be32(out, h.record_crc);
    put_be32(out, crc32(out)); // header_crc over all preceding bytes
    return out;
}

/// Decodes and validates a header block. Bad magic or version is NoPayload
/// (the image simply does not carry our format); a failed header CRC on a
/// well-formed magic is HeaderCorrupt.
inline PayloadHeader decode_header(const std::vector<std::uint8_t>& bytes) {
    using namespace payload_detail;
    if (bytes.size() != PayloadHeader::kEncodedSize)
        raise(Errc::no_payload, "header block has wrong size");
    if (!std::equal(PayloadHeader::kMagic.begin(), PayloadHeader::kMagic.end(), bytes.begin()))
        raise(Errc::no_payload, "no payload magic found");
    if (bytes[4] != PayloadHeader::kVersion)
        raise(Errc::no_payload, "unknown payload version");
    const std::uint32_t stored_crc = be32(&bytes[30]);
    if (crc32(bytes.data(), 30) != stored_crc)
        raise(Errc::header_corrupt, "header checksum mismatch");

    PayloadHeader h;
    h.flags = bytes[5];
    h.total_len = be32(&bytes[6]);
    for (int i = 0; i < 4; ++i) h.block_lens[i] = be32(&bytes[10 + 4 * i]);
    h.record_crc = be32(&bytes[26]);
    std::uint64_t sum = 0;
    for (std::uint32_t len : h.block_lens) sum += len;
    if (sum != h.total_len)
        raise(Errc::header_corrupt, "block lengths do not sum to total length");
    return h;
}

} // namespace stegret
