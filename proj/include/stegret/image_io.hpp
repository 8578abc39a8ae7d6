#pragma once

#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <png.h>

#include "stegret/error.hpp"
#include "stegret/image.hpp"

namespace stegret {

namespace io_detail {

inline std::vector<std::uint8_t> read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        raise(Errc::io_failure, "cannot open for reading: " + path.string());
    std::vector<std::uint8_t> data((std::istreambuf_iterator<char>(in)),
                                   std::istreambuf_iterator<char>());
    if (in.bad())
        raise(Errc::io_failure, "read failed: " + path.string());
    return data;
}

inline bool has_magic(const std::vector<std::uint8_t>& d, std::initializer_list<int> magic,
                      std::size_t offset = 0) {
    std::size_t i = offset;
    for (int b : magic) {
        if (i >= d.size()) return false;
        if (b >= 0 && d[i] != static_cast<std::uint8_t>(b)) return false;
        ++i;
    }
    return true;
}

inline std::uint16_t le16(const std::uint8_t* p) {
    return static_cast<std::uint16_t>(p[0] | (p[1] << 8));
}
inline std::uint32_t le32(const std::uint8_t* p) {
    return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
           (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}
inline void put_le16(std::vector<std::uint8_t>& out, std::uint16_t v) {
    out.push_back(static_cast<std::uint8_t>(v & 0xff));
    out.push_back(static_cast<std::uint8_t>(v >> 8));
}
inline void put_le32(std::vector<std::uint8_t>& out, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>((v >> (8 * i)) & 0xff));
}

inline ImageRaster decode_png(const std::vector<std::uint8_t>& data,
                              const std::string& name) {
    png_image image;
    std::memset(&image, 0, sizeof(image));
    image.version = PNG_IMAGE_VERSION;
    if (!png_image_begin_read_from_memory(&image, data.data(), data.size()))
        raise(Errc::malformed_file, name + ": " + image.message);

    // RGBA request: libpng expands palette/gray/low-depth and scales 16-bit,
    // we then drop the alpha bytes outright (no compositing).
    image.format = PNG_FORMAT_RGBA;
    std::vector<std::uint8_t> rgba(PNG_IMAGE_SIZE(image));
    if (!png_image_finish_read(&image, nullptr, rgba.data(), 0, nullptr)) {
        std::string msg = image.message;
        png_image_free(&image);
        raise(Errc::malformed_file, name + ": " + msg);
    }

    ImageRaster raster(static_cast<int>(image.width), static_cast<int>(image.height));
    const std::size_t pixels = raster.pixel_count();
    for (std::size_t i = 0; i < pixels; ++i) {
        raster.samples[i * 3 + 0] = rgba[i * 4 + 0];
        raster.samples[i * 3 + 1] = rgba[i * 4 + 1];
        raster.samples[i * 3 + 2] = rgba[i * 4 + 2];
    }
    return raster;
}

inline ImageRaster decode_bmp(const std::vector<std::uint8_t>& data,
                              const std::string& name) {
    if (data.size() < 54)
        raise(Errc::malformed_file, name + ": truncated bitmap header");
    const std::uint32_t pixel_offset = le32(&data[10]);
    const std::uint32_t info_size = le32(&data[14]);
    if (info_size < 40)
        raise(Errc::unsupported_format, name + ": legacy bitmap header");
    const std::int32_t width = static_cast<std::int32_t>(le32(&data[18]));
    const std::int32_t raw_height = static_cast<std::int32_t>(le32(&data[22]));
    const std::uint16_t bpp = le16(&data[28]);
    const std::uint32_t compression = le32(&data[30]);
    std::uint32_t clr_used = le32(&data[46]);

    if (compression != 0)
        raise(Errc::unsupported_format, name + ": compressed bitmap");
    if (width <= 0 || raw_height == 0 || width > (1 << 20) || std::abs(raw_height) > (1 << 20))
        raise(Errc::malformed_file, name + ": implausible bitmap dimensions");
    if (bpp != 1 && bpp != 4 && bpp != 8 && bpp != 24 && bpp != 32)
        raise(Errc::unsupported_format, name + ": unsupported bitmap bit depth");

    const bool bottom_up = raw_height > 0;
    const int height = std::abs(raw_height);
    const std::size_t stride = ((static_cast<std::size_t>(width) * bpp + 31) / 32) * 4;
    if (pixel_offset + stride * height > data.size())
        raise(Errc::malformed_file, name + ": truncated bitmap pixel data");

    // Palette for indexed depths, entries of 4 bytes B,G,R,reserved.
    std::vector<std::array<std::uint8_t, 3>> palette;
    if (bpp <= 8) {
        if (clr_used == 0) clr_used = 1u << bpp;
        if (clr_used > 256)
            raise(Errc::malformed_file, name + ": oversized palette");
        const std::size_t pal_off = 14 + info_size;
        if (pal_off + clr_used * 4 > data.size())
            raise(Errc::malformed_file, name + ": truncated palette");
        palette.resize(clr_used);
        for (std::uint32_t i = 0; i < clr_used; ++i) {
            palette[i] = {data[pal_off + i * 4 + 2], data[pal_off + i * 4 + 1],
                          data[pal_off + i * 4 + 0]};
        }
    }

    ImageRaster raster(width, height);
    for (int y = 0; y < height; ++y) {
        const int src_row = bottom_up ? height - 1 - y : y;
        const std::uint8_t* row = &data[pixel_offset + stride * src_row];
        for (int x = 0; x < width; ++x) {
            std::uint8_t r, g, b;
            if (bpp == 24 || bpp == 32) {
                const std::uint8_t* px = row + static_cast<std::size_t>(x) * (bpp / 8);
                b = px[0]; g = px[1]; r = px[2];
            } else {
                const int pixels_per_byte = 8 / bpp;
                const std::uint8_t byte = row[x / pixels_per_byte];
                const int shift = 8 - bpp * (x % pixels_per_byte + 1);
                const std::uint8_t idx = (byte >> shift) & ((1u << bpp) - 1);
                if (idx >= palette.size())
                    raise(Errc::malformed_file, name + ": palette index out of range");
                r = palette[idx][0]; g = palette[idx][1]; b = palette[idx][2];
            }
            raster.at(x, y, 0) = r;
            raster.at(x, y, 1) = g;
            raster.at(x, y, 2) = b;
        }
    }
    return raster;
}

} // namespace io_detail

/// Loads a lossless raster file (PNG or uncompressed BMP) as 8-bit RGB.
/// Grayscale and palette sources are expanded to RGB; alpha channels are
/// dropped. Anything else is rejected: lossy containers cannot carry
/// steganographic bits.
inline ImageRaster load_image(const std::filesystem::path& path) {
    using namespace io_detail;
    const auto data = read_file(path);
    const std::string name = path.string();

    if (has_magic(data, {0x89, 'P', 'N', 'G', 0x0d, 0x0a, 0x1a, 0x0a}))
        return decode_png(data, name);
    if (has_magic(data, {'B', 'M'}))
        return decode_bmp(data, name);
    if (has_magic(data, {0xff, 0xd8, 0xff}))
        raise(Errc::unsupported_format, name + ": JPEG is lossy, refusing");
    if (has_magic(data, {'G', 'I', 'F', '8'}))
        raise(Errc::unsupported_format, name + ": GIF container not supported");
    if (has_magic(data, {'R', 'I', 'F', 'F'}) && has_magic(data, {'W', 'E', 'B', 'P'}, 8))
        raise(Errc::unsupported_format, name + ": WebP container not supported");
    raise(Errc::unsupported_format, name + ": not a PNG or uncompressed BMP");
}

/// Writes `raster` losslessly; the format follows the file extension
/// (.png or .bmp). load_image(save_image(r)) reproduces r sample-for-sample.
inline void save_image(const ImageRaster& raster, const std::filesystem::path& path) {
    using namespace io_detail;
    std::string ext = path.extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });

    if (ext == ".png") {
        png_image image;
        std::memset(&image, 0, sizeof(image));
        image.version = PNG_IMAGE_VERSION;
        image.width = static_cast<png_uint_32>(raster.width);
        image.height = static_cast<png_uint_32>(raster.height);
        image.format = PNG_FORMAT_RGB;
        if (!png_image_write_to_file(&image, path.string().c_str(), 0,
                                     raster.samples.data(), 0, nullptr))
            raise(Errc::io_failure, path.string() + ": " + image.message);
        return;
    }
    if (ext == ".bmp") {
        const std::size_t stride = ((static_cast<std::size_t>(raster.width) * 24 + 31) / 32) * 4;
        const std::size_t pixel_bytes = stride * raster.height;
        std::vector<std::uint8_t> out;
        out.reserve(54 + pixel_bytes);
        out.push_back('B'); out.push_back('M');
        put_le32(out, static_cast<std::uint32_t>(54 + pixel_bytes));
        put_le32(out, 0);
        put_le32(out, 54);
        put_le32(out, 40);
        put_le32(out, static_cast<std::uint32_t>(raster.width));
        put_le32(out, static_cast<std::uint32_t>(raster.height));
        put_le16(out, 1);
        put_le16(out, 24);
        put_le32(out, 0);
        put_le32(out, static_cast<std::uint32_t>(pixel_bytes));
        put_le32(out, 2835); put_le32(out, 2835);
        put_le32(out, 0); put_le32(out, 0);
        for (int y = raster.height - 1; y >= 0; --y) {
            const std::size_t row_start = out.size();
            for (int x = 0; x < raster.width; ++x) {
                out.push_back(raster.at(x, y, 2));
                out.push_back(raster.at(x, y, 1));
                out.push_back(raster.at(x, y, 0));
            }
            while (out.size() - row_start < stride) out.push_back(0);
        }
        std::ofstream f(path, std::ios::binary | std::ios::trunc);
        if (!f)
            raise(Errc::io_failure, "cannot open for writing: " + path.string());
        f.write(reinterpret_cast<const char*>(out.data()),
                static_cast<std::streamsize>(out.size()));
        if (!f)
            raise(Errc::io_failure, "write failed: " + path.string());
        return;
    }
    raise(Errc::unsupported_format, path.string() + ": save supports .png and .bmp only");
}

} // namespace stegret
