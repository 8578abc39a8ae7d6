#include <catch2/catch_amalgamated.hpp>

#include <fstream>

#include "stegret/image.hpp"
#include "stegret/image_io.hpp"
#include "support.hpp"

using namespace stegret;
using testsupport::TempDir;

namespace {

void write_bytes(const std::filesystem::path& p, const std::vector<std::uint8_t>& bytes) {
    std::ofstream f(p, std::ios::binary);
    f.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
}

// Hand-crafted 2x2 all-black 24-bit BMP, byte by byte: an oracle independent
// of save_image.
std::vector<std::uint8_t> black_2x2_bmp() {
    std::vector<std::uint8_t> b = {
        'B', 'M', 70, 0, 0, 0, 0, 0, 0, 0, 54, 0, 0, 0, // file header
        40, 0, 0, 0,                                    // info size
        2, 0, 0, 0, 2, 0, 0, 0,                         // 2x2
        1, 0, 24, 0,                                    // planes, bpp
        0, 0, 0, 0,                                     // BI_RGB
        16, 0, 0, 0,                                    // pixel bytes
        0x13, 0x0b, 0, 0, 0x13, 0x0b, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0,
    };
    b.insert(b.end(), 16, 0); // two rows of 6 pixel bytes + 2 pad each
    return b;
}

} // namespace

TEST_CASE("hand-crafted 2x2 black bitmap loads as 12 zero samples") {
    TempDir tmp("img");
    write_bytes(tmp.path / "black.bmp", black_2x2_bmp());
    const ImageRaster img = load_image(tmp.path / "black.bmp");
    REQUIRE(img.width == 2);
    REQUIRE(img.height == 2);
    REQUIRE(img.samples == std::vector<std::uint8_t>(12, 0));
}

TEST_CASE("lossy and unknown containers are rejected") {
    TempDir tmp("img");
    write_bytes(tmp.path / "a.jpg", {0xff, 0xd8, 0xff, 0xe0, 0x00, 0x10, 'J', 'F', 'I', 'F'});
    write_bytes(tmp.path / "a.gif", {'G', 'I', 'F', '8', '9', 'a', 1, 0, 1, 0});
    write_bytes(tmp.path / "a.webp",
                {'R', 'I', 'F', 'F', 4, 0, 0, 0, 'W', 'E', 'B', 'P', 0, 0});
    write_bytes(tmp.path / "a.bin", {1, 2, 3, 4, 5, 6, 7, 8});
    for (const char* name : {"a.jpg", "a.gif", "a.webp", "a.bin"}) {
        try {
            load_image(tmp.path / name);
            FAIL("expected UnsupportedFormat for " << name);
        } catch (const Error& e) {
            REQUIRE(e.code() == Errc::unsupported_format);
        }
    }
}

TEST_CASE("missing file and truncated png report the right errors") {
    TempDir tmp("img");
    try {
        load_image(tmp.path / "nope.png");
        FAIL("expected IoFailure");
    } catch (const Error& e) {
        REQUIRE(e.code() == Errc::io_failure);
    }
    write_bytes(tmp.path / "trunc.png",
                {0x89, 'P', 'N', 'G', 0x0d, 0x0a, 0x1a, 0x0a, 0, 0, 0, 13});
    try {
        load_image(tmp.path / "trunc.png");
        FAIL("expected MalformedFile");
    } catch (const Error& e) {
        REQUIRE(e.code() == Errc::malformed_file);
    }
}

TEST_CASE("png and bmp round trips are lossless") {
    TempDir tmp("img");
    testsupport::Rng rng(41);
    for (const auto [w, h] : {std::pair{3, 3}, {7, 5}, {16, 16}, {33, 17}}) {
        const ImageRaster img = testsupport::noise_raster(w, h, rng.next());
        for (const char* name : {"t.png", "t.bmp"}) {
            save_image(img, tmp.path / name);
            const ImageRaster back = load_image(tmp.path / name);
            REQUIRE(back.width == img.width);
            REQUIRE(back.height == img.height);
            REQUIRE(back.samples == img.samples);
        }
    }
}

TEST_CASE("save to an unwritable path is an io failure") {
    TempDir tmp("img");
    const ImageRaster img = testsupport::noise_raster(4, 4, 7);
    for (const char* name : {"no-such-dir/x.png", "no-such-dir/x.bmp"}) {
        try {
            save_image(img, tmp.path / name);
            FAIL("expected IoFailure");
        } catch (const Error& e) {
            REQUIRE(e.code() == Errc::io_failure);
        }
    }
    try {
        save_image(img, tmp.path / "x.tiff");
        FAIL("expected UnsupportedFormat");
    } catch (const Error& e) {
        REQUIRE(e.code() == Errc::unsupported_format);
    }
}

TEST_CASE("grayscale png expands to replicated channels, alpha is dropped") {
    TempDir tmp("img");

    // Fixture files written with libpng directly, bypassing save_image.
    std::vector<std::uint8_t> gray(16);
    for (int i = 0; i < 16; ++i) gray[i] = static_cast<std::uint8_t>(i * 16);
    png_image gimg{};
    gimg.version = PNG_IMAGE_VERSION;
    gimg.width = 4;
    gimg.height = 4;
    gimg.format = PNG_FORMAT_GRAY;
    const auto gpath = (tmp.path / "gray.png").string();
    REQUIRE(png_image_write_to_file(&gimg, gpath.c_str(), 0, gray.data(), 0, nullptr) != 0);

    const ImageRaster g = load_image(tmp.path / "gray.png");
    for (int i = 0; i < 16; ++i) {
        REQUIRE(g.samples[i * 3 + 0] == gray[i]);
        REQUIRE(g.samples[i * 3 + 1] == gray[i]);
        REQUIRE(g.samples[i * 3 + 2] == gray[i]);
    }

    std::vector<std::uint8_t> rgba;
    for (int i = 0; i < 9; ++i) {
        rgba.push_back(static_cast<std::uint8_t>(10 + i));
        rgba.push_back(static_cast<std::uint8_t>(100 + i));
        rgba.push_back(static_cast<std::uint8_t>(200 + i));
        rgba.push_back(17); // nearly transparent; must NOT be composited
    }
    png_image aimg{};
    aimg.version = PNG_IMAGE_VERSION;
    aimg.width = 3;
    aimg.height = 3;
    aimg.format = PNG_FORMAT_RGBA;
    const auto apath = (tmp.path / "rgba.png").string();
    REQUIRE(png_image_write_to_file(&aimg, apath.c_str(), 0, rgba.data(), 0, nullptr) != 0);

    const ImageRaster a = load_image(tmp.path / "rgba.png");
    for (int i = 0; i < 9; ++i) {
        REQUIRE(a.samples[i * 3 + 0] == rgba[i * 4 + 0]);
        REQUIRE(a.samples[i * 3 + 1] == rgba[i * 4 + 1]);
        REQUIRE(a.samples[i * 3 + 2] == rgba[i * 4 + 2]);
    }
}

TEST_CASE("palette bmp decodes through its color table") {
    TempDir tmp("img");
    // 2x1, 8bpp, 2-entry palette: index 0 -> (1,2,3), index 1 -> (9,8,7).
    std::vector<std::uint8_t> b = {
        'B', 'M', 0, 0, 0, 0, 0, 0, 0, 0, 62, 0, 0, 0,
        40, 0, 0, 0, 2, 0, 0, 0, 1, 0, 0, 0, 1, 0, 8, 0,
        0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0,
        2, 0, 0, 0, 0, 0, 0, 0,
        3, 2, 1, 0, // palette entry 0 (B,G,R,x)
        7, 8, 9, 0, // palette entry 1
        0, 1, 0, 0, // one row: indices 0,1 + pad
    };
    write_bytes(tmp.path / "pal.bmp", b);
    const ImageRaster img = load_image(tmp.path / "pal.bmp");
    REQUIRE(img.width == 2);
    REQUIRE(img.height == 1);
    REQUIRE(img.samples == std::vector<std::uint8_t>{1, 2, 3, 9, 8, 7});
}

TEST_CASE("compressed bmp is rejected") {
    TempDir tmp("img");
    auto b = black_2x2_bmp();
    b[30] = 1; // BI_RLE8
    write_bytes(tmp.path / "rle.bmp", b);
    try {
        load_image(tmp.path / "rle.bmp");
        FAIL("expected UnsupportedFormat");
    } catch (const Error& e) {
        REQUIRE(e.code() == Errc::unsupported_format);
    }
}

TEST_CASE("quadrant split covers the raster exactly") {
    SECTION("even split") {
        const auto geo = quadrants(ImageRaster(4, 4));
        for (const auto& r : geo.rects) {
            REQUIRE(r.w == 2);
            REQUIRE(r.h == 2);
        }
        REQUIRE(geo.rects[0].x0 == 0);
        REQUIRE(geo.rects[3].x0 == 2);
        REQUIRE(geo.rects[3].y0 == 2);
    }
    SECTION("odd dimensions go to the right/bottom") {
        const auto geo = quadrants(ImageRaster(5, 5));
        REQUIRE(geo.rects[0].w == 2);
        REQUIRE(geo.rects[1].w == 3);
        REQUIRE(geo.rects[0].h == 2);
        REQUIRE(geo.rects[2].h == 3);
        REQUIRE(geo.rects[3].w == 3);
        REQUIRE(geo.rects[3].h == 3);
    }
    SECTION("corel dimensions") {
        const auto geo = quadrants(ImageRaster(384, 256));
        for (const auto& r : geo.rects) {
            REQUIRE(r.w == 192);
            REQUIRE(r.h == 128);
        }
    }
    SECTION("too small") {
        try {
            quadrants(ImageRaster(1, 5));
            FAIL("expected ImageTooSmall");
        } catch (const Error& e) {
            REQUIRE(e.code() == Errc::image_too_small);
        }
    }
    SECTION("randomized partition property") {
        testsupport::Rng rng(99);
        for (int trial = 0; trial < 50; ++trial) {
            const int w = rng.range(2, 40), h = rng.range(2, 40);
            const auto geo = quadrants(ImageRaster(w, h));
            std::vector<int> covered(static_cast<std::size_t>(w) * h, 0);
            for (const auto& r : geo.rects)
                for (int y = r.y0; y < r.y0 + r.h; ++y)
                    for (int x = r.x0; x < r.x0 + r.w; ++x)
                        covered[static_cast<std::size_t>(y) * w + x] += 1;
            for (int c : covered) REQUIRE(c == 1); // disjoint and exhaustive
        }
    }
}
