#pragma once

#include <cstdint>
#include <vector>

#include "stegret/edges.hpp"
#include "stegret/error.hpp"
#include "stegret/image.hpp"
#include "stegret/payload.hpp"

namespace stegret {

/// Bits-per-sample at smooth and edge pixels. Format parameters: extraction
/// must run with the same values that were used at embed time.
struct EmbedConfig {
    int k_smooth = 1;
    int k_edge = 3;
    EdgeParams edge_params;

    void validate() const {
        if (!(1 <= k_smooth && k_smooth <= k_edge && k_edge <= 4))
            raise(Errc::parse_error, "need 1 <= k_smooth <= k_edge <= 4");
        if (edge_params.mask_bits != k_edge)
            raise(Errc::parse_error, "edge_params.mask_bits must equal k_edge");
        edge_params.validate();
    }
};

struct StegoImage {
    ImageRaster raster;
};

// The 34-byte header occupies 1 LSB per channel of the first 91 pixels in
// raster order (272 bits used, the last bit slot unused). Those pixels never
// carry payload bits.
constexpr std::size_t kHeaderPixels = 91;

namespace stego_detail {

inline std::vector<std::uint8_t> bytes_to_bits(const std::vector<std::uint8_t>& bytes) {
    std::vector<std::uint8_t> bits(bytes.size() * 8);
    for (std::size_t i = 0; i < bits.size(); ++i)
        bits[i] = (bytes[i / 8] >> (7 - i % 8)) & 1;
    return bits;
}

inline std::vector<std::uint8_t> bits_to_bytes(const std::vector<std::uint8_t>& bits) {
    std::vector<std::uint8_t> bytes((bits.size() + 7) / 8, 0);
    for (std::size_t i = 0; i < bits.size(); ++i)
        if (bits[i]) bytes[i / 8] |= static_cast<std::uint8_t>(1u << (7 - i % 8));
    return bytes;
}

// Writes the next t = min(width, remaining) stream bits into the top t bits
// of the sample's low `width`-bit field, first stream bit most significant.
// A partial final write leaves the field's low width-t bits untouched.
inline void write_field(std::uint8_t& sample, int width,
                        const std::vector<std::uint8_t>& bits, std::size_t& cursor) {
    const int t = static_cast<int>(std::min<std::size_t>(width, bits.size() - cursor));
    if (t == 0) return;
    int value = 0;
    for (int i = 0; i < t; ++i) value = (value << 1) | bits[cursor++];
    const int shift = width - t;
    const int mask = ((1 << t) - 1) << shift;
    sample = static_cast<std::uint8_t>((sample & ~mask) | (value << shift));
}

inline void read_field(std::uint8_t sample, int width,
                       std::vector<std::uint8_t>& bits, std::size_t total) {
    const int t = static_cast<int>(std::min<std::size_t>(width, total - bits.size()));
    for (int i = 0; i < t; ++i)
        bits.push_back((sample >> (width - 1 - i)) & 1);
}

// Visits every payload-carrying sample of a quadrant in raster order,
// channels R,G,B per pixel, skipping the header pixels. fn receives the flat
// sample index and the field width for that pixel; returning false stops.
template <typename Fn>
inline void for_each_quadrant_sample(const ImageRaster& raster, const Rect& rect,
                                     const EdgeMap& map, const EmbedConfig& cfg, Fn&& fn) {
    for (int y = rect.y0; y < rect.y0 + rect.h; ++y) {
        for (int x = rect.x0; x < rect.x0 + rect.w; ++x) {
            const std::size_t pixel = static_cast<std::size_t>(y) * raster.width + x;
            if (pixel < kHeaderPixels) continue;
            const int width = map.at(x, y) ? cfg.k_edge : cfg.k_smooth;
            for (int c = 0; c < 3; ++c)
                if (!fn(pixel * 3 + c, width)) return;
        }
    }
}

inline std::uint64_t quadrant_capacity_bits(const ImageRaster& raster, const Rect& rect,
                                            const EdgeMap& map, const EmbedConfig& cfg) {
    std::uint64_t bits = 0;
    for_each_quadrant_sample(raster, rect, map, cfg,
                             [&](std::size_t, int width) {
                                 bits += static_cast<std::uint64_t>(width);
                                 return true;
                             });
    return bits;
}

inline void require_esha_geometry(const ImageRaster& raster) {
    if (raster.width < 5 || raster.height < 5)
        raise(Errc::image_too_small, "embedding needs at least a 5x5 raster");
    if (raster.pixel_count() < kHeaderPixels)
        raise(Errc::image_too_small, "raster too small to hold the payload header");
}

} // namespace stego_detail

/// Total payload capacity in bits: 3 samples per non-header pixel, k_edge
/// bits each at hybrid-edge pixels and k_smooth elsewhere.
inline std::uint64_t capacity(const ImageRaster& raster, const EmbedConfig& cfg) {
    cfg.validate();
    if (raster.width < 5 || raster.height < 5)
        raise(Errc::image_too_small, "capacity needs at least a 5x5 raster");
    const EdgeMap map = hybrid_edges(raster, cfg.edge_params);
    std::uint64_t bits = 0;
    for (int y = 0; y < raster.height; ++y) {
        for (int x = 0; x < raster.width; ++x) {
            const std::size_t pixel = static_cast<std::size_t>(y) * raster.width + x;
            if (pixel < kHeaderPixels) continue;
            bits += 3ull * (map.at(x, y) ? cfg.k_edge : cfg.k_smooth);
        }
    }
    return bits;
}

/// Edge-adaptive embedding: serialize, split into four blocks, encrypt each,
/// write the plaintext header at 1 LSB/channel into the first 91 pixels, then
/// write block i into quadrant perm[i] (perm derived from the stego key),
/// k_edge or k_smooth low bits per sample, most-significant payload bit
/// first. Samples the traversal never reaches are bit-identical to the cover.
inline StegoImage esha_embed(const ImageRaster& cover, const SemanticRecord& rec,
                             const EncryptionKey& ek, const StegoKey& sk,
                             const EmbedConfig& cfg = {}) {
    using namespace stego_detail;
    cfg.validate();
    ek.validate();
    sk.validate();
    require_esha_geometry(cover);

    const std::vector<std::uint8_t> plain = serialize_record(rec);
    const auto blocks = split_blocks(plain);
    std::array<std::vector<std::uint8_t>, 4> cipher;
    for (int i = 0; i < 4; ++i) cipher[i] = encrypt_block(blocks[i], ek, i);

    PayloadHeader header;
    header.flags = 1;
    header.total_len = static_cast<std::uint32_t>(plain.size());
    for (int i = 0; i < 4; ++i)
        header.block_lens[i] = static_cast<std::uint32_t>(blocks[i].size());
    header.record_crc = crc32(plain);
    const auto header_bits = bytes_to_bits(encode_header(header));

    StegoImage stego{cover};
    for (std::size_t i = 0; i < header_bits.size(); ++i)
        stego.raster.samples[i] =
            static_cast<std::uint8_t>((stego.raster.samples[i] & ~1u) | header_bits[i]);

    // Header writes touch only bit 0 <= mask_bits, so this map equals both the
    // cover's map and the one the extractor recomputes from the stego image.
    const EdgeMap map = hybrid_edges(stego.raster, cfg.edge_params);
    const QuadrantGeometry geo = quadrants(stego.raster);
    const auto perm = quadrant_permutation(sk);

    for (int i = 0; i < 4; ++i) {
        const Rect& rect = geo.rects[perm[i]];
        const auto bits = bytes_to_bits(cipher[i]);
        const std::uint64_t room = quadrant_capacity_bits(stego.raster, rect, map, cfg);
        if (bits.size() > room)
            raise(Errc::capacity_exceeded,
                  "block of " + std::to_string(bits.size()) + " bits exceeds quadrant capacity of " +
                      std::to_string(room) + " bits (total capacity " +
                      std::to_string(capacity(cover, cfg)) + ")");
        std::size_t cursor = 0;
        for_each_quadrant_sample(stego.raster, rect, map, cfg,
                                 [&](std::size_t sample, int width) {
                                     write_field(stego.raster.samples[sample], width, bits, cursor);
                                     return cursor < bits.size();
                                 });
    }
    return stego;
}

/// Inverse of esha_embed. Recomputes the hybrid edge map from the stego image
/// itself (identical to the embed-time map by construction), re-derives the
/// quadrant permutation from the stego key, reads and decrypts the four
/// blocks, and verifies the record checksum before deserializing. A wrong
/// key of either kind surfaces as IntegrityFailure.
inline SemanticRecord esha_extract(const ImageRaster& stego, const EncryptionKey& ek,
                                   const StegoKey& sk, const EmbedConfig& cfg = {}) {
    using namespace stego_detail;
    cfg.validate();
    ek.validate();
    sk.validate();
    require_esha_geometry(stego);

    std::vector<std::uint8_t> header_bits(PayloadHeader::kBits);
    for (std::size_t i = 0; i < header_bits.size(); ++i)
        header_bits[i] = stego.samples[i] & 1;
    const PayloadHeader header = decode_header(bits_to_bytes(header_bits));
    if (!header.payload_present())
        raise(Errc::no_payload, "header present but no payload flag set");

    const EdgeMap map = hybrid_edges(stego, cfg.edge_params);
    const QuadrantGeometry geo = quadrants(stego);
    const auto perm = quadrant_permutation(sk);

    std::vector<std::uint8_t> plain;
    for (int i = 0; i < 4; ++i) {
        const Rect& rect = geo.rects[perm[i]];
        const std::size_t want_bits = static_cast<std::size_t>(header.block_lens[i]) * 8;
        // cheap allocation bound; an untrusted header cannot force a large
        // reserve past what the quadrant could physically hold
        const std::size_t slot_bound =
            static_cast<std::size_t>(rect.w) * rect.h * 3 * cfg.k_edge;
        std::vector<std::uint8_t> bits;
        bits.reserve(std::min(want_bits, slot_bound));
        for_each_quadrant_sample(stego, rect, map, cfg,
                                 [&](std::size_t sample, int width) {
                                     read_field(stego.samples[sample], width, bits, want_bits);
                                     return bits.size() < want_bits;
                                 });
        if (bits.size() < want_bits)
            raise(Errc::integrity_failure,
                  "declared block length exceeds quadrant capacity (key or config mismatch)");
        const auto block = decrypt_block(bits_to_bytes(bits), ek, i);
        plain.insert(plain.end(), block.begin(), block.end());
    }

    if (plain.size() != header.total_len || crc32(plain) != header.record_crc)
        raise(Errc::integrity_failure, "record checksum mismatch (wrong key or tampered image)");
    return deserialize_record(plain);
}

/// Probes for a syntactically valid header without needing any key.
inline bool has_payload_header(const ImageRaster& raster) {
    if (raster.pixel_count() < kHeaderPixels) return false;
    std::vector<std::uint8_t> bits(PayloadHeader::kBits);
    for (std::size_t i = 0; i < bits.size(); ++i) bits[i] = raster.samples[i] & 1;
    try {
        return decode_header(stego_detail::bits_to_bytes(bits)).payload_present();
    } catch (const Error&) {
        return false;
    }
}

// ---------------------------------------------------------------------------
// LSB-family baselines used by the evaluation harness.

/// Plain LSB: overwrite the k low bits of consecutive samples in raster
/// order, channel-interleaved, most-significant message bit first.
inline ImageRaster lsb_embed(const ImageRaster& cover, const std::vector<std::uint8_t>& bits,
                             int k) {
    using namespace stego_detail;
    if (k < 1 || k > 8) raise(Errc::parse_error, "lsb depth must be in [1, 8]");
    if (bits.size() > cover.sample_count() * static_cast<std::size_t>(k))
        raise(Errc::capacity_exceeded, "message does not fit at " + std::to_string(k) +
                                           " bits per sample");
    ImageRaster out = cover;
    std::size_t cursor = 0;
    for (std::size_t s = 0; s < out.samples.size() && cursor < bits.size(); ++s)
        write_field(out.samples[s], k, bits, cursor);
    return out;
}

inline std::vector<std::uint8_t> lsb_extract(const ImageRaster& raster, std::size_t n_bits,
                                             int k) {
    using namespace stego_detail;
    if (k < 1 || k > 8) raise(Errc::parse_error, "lsb depth must be in [1, 8]");
    if (n_bits > raster.sample_count() * static_cast<std::size_t>(k))
        raise(Errc::capacity_exceeded, "requested more bits than the raster can carry");
    std::vector<std::uint8_t> bits;
    bits.reserve(n_bits);
    for (std::size_t s = 0; s < raster.samples.size() && bits.size() < n_bits; ++s)
        read_field(raster.samples[s], k, bits, n_bits);
    return bits;
}

/// LSB matching: one bit per sample; where the LSB already matches the sample
/// is untouched, otherwise the sample moves by +-1 (keystream-chosen, forced
/// inward at 0 and 255), which flips the LSB either way.
inline ImageRaster lsbm_embed(const ImageRaster& cover, const std::vector<std::uint8_t>& bits,
                              const EncryptionKey& key) {
    if (bits.size() > cover.sample_count())
        raise(Errc::capacity_exceeded, "message does not fit at 1 bit per sample");
    const auto ks = keystream(key, 0, bits.size());
    ImageRaster out = cover;
    for (std::size_t i = 0; i < bits.size(); ++i) {
        std::uint8_t& s = out.samples[i];
        if ((s & 1) == bits[i]) continue;
        int delta = (ks[i] & 1) ? 1 : -1;
        if (s == 0) delta = 1;
        if (s == 255) delta = -1;
        s = static_cast<std::uint8_t>(s + delta);
    }
    return out;
}

inline std::vector<std::uint8_t> lsbm_extract(const ImageRaster& raster, std::size_t n_bits) {
    if (n_bits > raster.sample_count())
        raise(Errc::capacity_exceeded, "requested more bits than the raster can carry");
    std::vector<std::uint8_t> bits(n_bits);
    for (std::size_t i = 0; i < n_bits; ++i) bits[i] = raster.samples[i] & 1;
    return bits;
}

/// LSB matching revisited: embeds two bits per sample pair (p1, p2) so that
/// b1 = LSB(p1) and b2 = LSB(floor(p1/2) + p2), normally with at most one
/// +-1 change per pair. When a saturated sample forces the wrong direction,
/// the pair is repaired with a second +-1 on p2 (rare).
inline ImageRaster lsbmr_embed(const ImageRaster& cover, const std::vector<std::uint8_t>& bits,
                               const EncryptionKey& key) {
    if (bits.size() % 2 != 0)
        raise(Errc::odd_bit_count, "lsbmr embeds bit pairs; message length must be even");
    const std::size_t pairs = bits.size() / 2;
    if (pairs > cover.sample_count() / 2)
        raise(Errc::capacity_exceeded, "message does not fit at 2 bits per sample pair");
    const auto ks = keystream(key, 0, pairs);

    ImageRaster out = cover;
    for (std::size_t t = 0; t < pairs; ++t) {
        const int b1 = bits[2 * t], b2 = bits[2 * t + 1];
        int p1 = out.samples[2 * t], p2 = out.samples[2 * t + 1];

        const auto adjust_p2 = [&] {
            int delta = (ks[t] & 1) ? 1 : -1;
            if (p2 == 0) delta = 1;
            if (p2 == 255) delta = -1;
            p2 += delta;
        };

        if ((p1 & 1) == b1) {
            if (((p1 / 2 + p2) & 1) != b2) adjust_p2();
        } else {
            const int down = p1 - 1, up = p1 + 1;
            if (down >= 0 && ((down / 2 + p2) & 1) == b2) {
                p1 = down;
            } else if (up <= 255 && ((up / 2 + p2) & 1) == b2) {
                p1 = up;
            } else {
                p1 = down >= 0 ? down : up;
                adjust_p2();
            }
        }
        out.samples[2 * t] = static_cast<std::uint8_t>(p1);
        out.samples[2 * t + 1] = static_cast<std::uint8_t>(p2);
    }
    return out;
}

inline std::vector<std::uint8_t> lsbmr_extract(const ImageRaster& raster, std::size_t n_bits) {
    if (n_bits % 2 != 0)
        raise(Errc::odd_bit_count, "lsbmr extracts bit pairs; count must be even");
    if (n_bits / 2 > raster.sample_count() / 2)
        raise(Errc::capacity_exceeded, "requested more bits than the raster can carry");
    std::vector<std::uint8_t> bits(n_bits);
    for (std::size_t t = 0; t < n_bits / 2; ++t) {
        const int p1 = raster.samples[2 * t], p2 = raster.samples[2 * t + 1];
        bits[2 * t] = static_cast<std::uint8_t>(p1 & 1);
        bits[2 * t + 1] = static_cast<std::uint8_t>((p1 / 2 + p2) & 1);
    }
    return bits;
}

} // namespace stegret
