#include <catch2/catch_amalgamated.hpp>

#include <set>

#include "stegret/payload.hpp"
#include "support.hpp"

using namespace stegret;

namespace {

// Independent keystream reference: same published constants, separate code
// path. The frozen bytes below were additionally cross-checked against a
// third implementation before being written down.
std::vector<std::uint8_t> keystream_reference(const std::string& key, int idx, std::size_t n) {
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char c : key) {
        h ^= c;
        h *= 0x100000001b3ull;
    }
    std::uint64_t s = h ^ (static_cast<std::uint64_t>(idx + 1) * 0x9E3779B97F4A7C15ull);
    if (s == 0) s = 0x9E3779B97F4A7C15ull;
    std::vector<std::uint8_t> out;
    for (std::size_t i = 0; i < n; ++i) {
        s ^= s >> 12;
        s ^= s << 25;
        s ^= s >> 27;
        out.push_back(static_cast<std::uint8_t>((s * 0x2545F4914F6CDD1Dull) >> 56));
    }
    return out;
}

std::vector<std::uint8_t> ascii(const char* s) {
    return std::vector<std::uint8_t>(s, s + std::strlen(s));
}

} // namespace

TEST_CASE("record serialization") {
    SECTION("minimal record encodes class + empty description") {
        const SemanticRecord rec{"sky", {}, "", {}};
        const auto bytes = serialize_record(rec);
        const std::vector<std::uint8_t> expected = {0x00, 0x02, 0x01, 0x00, 0x03,
                                                    's',  'k',  'y',  0x03, 0x00, 0x00};
        REQUIRE(bytes == expected);
        REQUIRE(deserialize_record(bytes) == rec);
    }
    SECTION("empty class label is rejected") {
        try {
            serialize_record(SemanticRecord{"", {}, "", {}});
            FAIL("expected InvalidRecord");
        } catch (const Error& e) {
            REQUIRE(e.code() == Errc::invalid_record);
        }
        REQUIRE_THROWS_AS(serialize_record(SemanticRecord{std::string(65, 'a'), {}, "", {}}),
                          Error);
    }
    SECTION("oversized field is rejected") {
        SemanticRecord rec{"a", {}, std::string(70000, 'x'), {}};
        try {
            serialize_record(rec);
            FAIL("expected FieldTooLong");
        } catch (const Error& e) {
            REQUIRE(e.code() == Errc::field_too_long);
        }
    }
    SECTION("round trip on randomized records") {
        testsupport::Rng rng(5);
        for (int i = 0; i < 100; ++i) {
            const SemanticRecord rec = testsupport::random_record(rng);
            REQUIRE(deserialize_record(serialize_record(rec)) == rec);
        }
    }
    SECTION("malformed payloads are rejected") {
        REQUIRE_THROWS_AS(deserialize_record({}), Error);
        REQUIRE_THROWS_AS(deserialize_record({0x00, 0x01, 0x09, 0x00, 0x00}), Error); // bad tag
        auto bytes = serialize_record(SemanticRecord{"sky", {}, "", {}});
        bytes.push_back(0); // trailing byte
        REQUIRE_THROWS_AS(deserialize_record(bytes), Error);
    }
}

TEST_CASE("four-way split") {
    const auto lens = [](const std::vector<std::uint8_t>& data) {
        const auto blocks = split_blocks(data);
        return std::array<std::size_t, 4>{blocks[0].size(), blocks[1].size(), blocks[2].size(),
                                          blocks[3].size()};
    };
    REQUIRE(lens(std::vector<std::uint8_t>(8)) == std::array<std::size_t, 4>{2, 2, 2, 2});
    REQUIRE(lens(std::vector<std::uint8_t>(9)) == std::array<std::size_t, 4>{3, 3, 3, 0});
    REQUIRE(lens({}) == std::array<std::size_t, 4>{0, 0, 0, 0});

    testsupport::Rng rng(6);
    for (int i = 0; i < 50; ++i) {
        std::vector<std::uint8_t> data(rng.below(100));
        for (auto& b : data) b = rng.byte();
        const auto blocks = split_blocks(data);
        std::vector<std::uint8_t> joined;
        for (const auto& b : blocks) joined.insert(joined.end(), b.begin(), b.end());
        REQUIRE(joined == data);
        const std::size_t q = (data.size() + 3) / 4;
        for (int j = 0; j < 4; ++j)
            REQUIRE(blocks[j].size() ==
                    std::min(q, data.size() - std::min(data.size(), j * q)));
    }
}

TEST_CASE("keystream generator") {
    SECTION("frozen cross-implementation vector") {
        const auto ks = keystream(EncryptionKey{"k"}, 0, 4);
        REQUIRE(ks == std::vector<std::uint8_t>{0x0c, 0x17, 0xf7, 0x11});
        REQUIRE(keystream(EncryptionKey{"k"}, 1, 4) ==
                std::vector<std::uint8_t>{0x5c, 0x0b, 0x2e, 0x0c});
    }
    SECTION("matches the reference implementation") {
        testsupport::Rng rng(7);
        for (int i = 0; i < 20; ++i) {
            const std::string key = testsupport::random_key(rng);
            const int idx = rng.below(4);
            const std::size_t n = rng.below(64);
            REQUIRE(keystream(EncryptionKey{key}, idx, n) == keystream_reference(key, idx, n));
        }
    }
    SECTION("zero length and determinism") {
        REQUIRE(keystream(EncryptionKey{"k"}, 0, 0).empty());
        REQUIRE(keystream(EncryptionKey{"abc"}, 2, 16) == keystream(EncryptionKey{"abc"}, 2, 16));
    }
    SECTION("distinct block indices give distinct streams") {
        testsupport::Rng rng(8);
        for (int i = 0; i < 10; ++i) {
            const EncryptionKey key{testsupport::random_key(rng)};
            for (int a = 0; a < 4; ++a)
                for (int b = a + 1; b < 4; ++b)
                    REQUIRE(keystream(key, a, 32) != keystream(key, b, 32));
        }
    }
}

TEST_CASE("block cipher round trip") {
    testsupport::Rng rng(9);
    SECTION("identity for all block indices") {
        for (int i = 0; i < 25; ++i) {
            std::vector<std::uint8_t> block(rng.below(80));
            for (auto& b : block) b = rng.byte();
            const EncryptionKey key{testsupport::random_key(rng)};
            for (int idx = 0; idx < 4; ++idx)
                REQUIRE(decrypt_block(encrypt_block(block, key, idx), key, idx) == block);
        }
    }
    SECTION("empty block") {
        REQUIRE(encrypt_block({}, EncryptionKey{"k"}, 0).empty());
    }
    SECTION("wrong key garbles") {
        for (int i = 0; i < 20; ++i) {
            std::vector<std::uint8_t> block(32);
            for (auto& b : block) b = rng.byte();
            const EncryptionKey a{testsupport::random_key(rng)};
            EncryptionKey b{testsupport::random_key(rng)};
            while (b.passphrase == a.passphrase) b.passphrase = testsupport::random_key(rng);
            REQUIRE(decrypt_block(encrypt_block(block, a, 1), b, 1) != block);
        }
    }
    SECTION("ciphertext differs from plaintext") {
        const auto block = ascii("semantic payload");
        REQUIRE(encrypt_block(block, EncryptionKey{"k"}, 0) != block);
    }
}

TEST_CASE("quadrant permutation") {
    REQUIRE(nth_permutation(0) == std::array<int, 4>{0, 1, 2, 3});
    REQUIRE(nth_permutation(23) == std::array<int, 4>{3, 2, 1, 0});

    // Lexicographic order, all 24 distinct bijections.
    std::set<std::array<int, 4>> seen;
    std::array<int, 4> prev{};
    for (int i = 0; i < 24; ++i) {
        const auto p = nth_permutation(i);
        std::array<bool, 4> hit{};
        for (int v : p) {
            REQUIRE(v >= 0);
            REQUIRE(v < 4);
            hit[static_cast<std::size_t>(v)] = true;
        }
        REQUIRE((hit[0] && hit[1] && hit[2] && hit[3]));
        if (i > 0) REQUIRE(prev < p);
        prev = p;
        seen.insert(p);
    }
    REQUIRE(seen.size() == 24);

    // FNV-derived index, frozen: fnv1a64("k") % 24 == 2.
    REQUIRE(quadrant_permutation(StegoKey{"k"}) == std::array<int, 4>{0, 2, 1, 3});

    // Rough uniformity over random keys (chi-square sanity, loose bound).
    testsupport::Rng rng(10);
    std::array<int, 24> buckets{};
    const int draws = 4800;
    for (int i = 0; i < draws; ++i) {
        const auto p = quadrant_permutation(StegoKey{testsupport::random_key(rng)});
        for (int idx = 0; idx < 24; ++idx)
            if (nth_permutation(idx) == p) ++buckets[static_cast<std::size_t>(idx)];
    }
    const double expected = draws / 24.0;
    double chi2 = 0.0;
    for (int count : buckets) chi2 += (count - expected) * (count - expected) / expected;
    REQUIRE(chi2 < 80.0); // 23 degrees of freedom; generous
}

TEST_CASE("crc32 reference values") {
    REQUIRE(crc32(nullptr, 0) == 0x00000000u);
    REQUIRE(crc32(ascii("123456789")) == 0xCBF43926u);

    testsupport::Rng rng(11);
    for (int i = 0; i < 100; ++i) {
        std::vector<std::uint8_t> data(rng.range(1, 64));
        for (auto& b : data) b = rng.byte();
        const std::uint32_t base = crc32(data);
        auto flipped = data;
        flipped[rng.next() % flipped.size()] ^= static_cast<std::uint8_t>(1u << rng.below(8));
        REQUIRE(crc32(flipped) != base);
    }
}

TEST_CASE("payload header encode/decode") {
    PayloadHeader h;
    h.flags = 1;
    h.total_len = 10;
    h.block_lens = {3, 3, 3, 1};
    h.record_crc = 0xDEADBEEF;

    const auto bytes = encode_header(h);
    REQUIRE(bytes.size() == PayloadHeader::kEncodedSize);
    const PayloadHeader back = decode_header(bytes);
    REQUIRE(back.flags == h.flags);
    REQUIRE(back.total_len == h.total_len);
    REQUIRE(back.block_lens == h.block_lens);
    REQUIRE(back.record_crc == h.record_crc);

    SECTION("bad magic is no-payload") {
        auto tampered = bytes;
        tampered[0] = 'X';
        try {
            decode_header(tampered);
            FAIL("expected NoPayload");
        } catch (const Error& e) {
            REQUIRE(e.code() == Errc::no_payload);
        }
    }
    SECTION("bad version is no-payload") {
        auto tampered = bytes;
        tampered[4] = 2;
        // version byte participates in header_crc, so re-stamp the crc
        const std::uint32_t c = crc32(tampered.data(), 30);
        tampered[30] = static_cast<std::uint8_t>(c >> 24);
        tampered[31] = static_cast<std::uint8_t>(c >> 16);
        tampered[32] = static_cast<std::uint8_t>(c >> 8);
        tampered[33] = static_cast<std::uint8_t>(c);
        try {
            decode_header(tampered);
            FAIL("expected NoPayload");
        } catch (const Error& e) {
            REQUIRE(e.code() == Errc::no_payload);
        }
    }
    SECTION("crc mismatch is header-corrupt") {
        auto tampered = bytes;
        tampered[7] ^= 0x40; // inside total_len
        try {
            decode_header(tampered);
            FAIL("expected HeaderCorrupt");
        } catch (const Error& e) {
            REQUIRE(e.code() == Errc::header_corrupt);
        }
    }
    SECTION("inconsistent block lengths are header-corrupt") {
        auto tampered = bytes;
        tampered[13] += 1; // block_lens[0] low byte
        const std::uint32_t c = crc32(tampered.data(), 30);
        tampered[30] = static_cast<std::uint8_t>(c >> 24);
        tampered[31] = static_cast<std::uint8_t>(c >> 16);
        tampered[32] = static_cast<std::uint8_t>(c >> 8);
        tampered[33] = static_cast<std::uint8_t>(c);
        try {
            decode_header(tampered);
            FAIL("expected HeaderCorrupt");
        } catch (const Error& e) {
            REQUIRE(e.code() == Errc::header_corrupt);
        }
    }
}

TEST_CASE("full payload pipeline inverts") {
    testsupport::Rng rng(12);
    for (int i = 0; i < 40; ++i) {
        const SemanticRecord rec = testsupport::random_record(rng);
        const EncryptionKey key{testsupport::random_key(rng)};
        const auto plain = serialize_record(rec);
        const auto blocks = split_blocks(plain);
        std::vector<std::uint8_t> joined;
        for (int idx = 0; idx < 4; ++idx) {
            const auto round = decrypt_block(encrypt_block(blocks[idx], key, idx), key, idx);
            joined.insert(joined.end(), round.begin(), round.end());
        }
        REQUIRE(deserialize_record(joined) == rec);
    }
}
