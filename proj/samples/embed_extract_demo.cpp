// Minimal library walkthrough: build a cover in memory, embed a record,
// write/reload it as PNG, and extract the record back.

#include <cstdlib>
#include <iostream>

#include "stegret/stegret.hpp"

int main() {
    using namespace stegret;

    ImageRaster cover(128, 128);
    for (int y = 0; y < cover.height; ++y)
        for (int x = 0; x < cover.width; ++x) {
            cover.at(x, y, 0) = static_cast<std::uint8_t>(x * 2);
            cover.at(x, y, 1) = static_cast<std::uint8_t>(y * 2);
            cover.at(x, y, 2) = static_cast<std::uint8_t>((x + y) & 0xff);
        }

    SemanticRecord rec;
    rec.class_label = "beach";
    rec.keywords = {"seashore", "coast"};
    rec.description = "sand with low waves";

    const EncryptionKey ek{"demo-encryption-key"};
    const StegoKey sk{"demo-stego-key"};

    const StegoImage stego = esha_embed(cover, rec, ek, sk);
    std::cout << "embedded " << serialize_record(rec).size() << " record bytes, psnr "
              << psnr(cover, stego.raster) << " dB, ssim " << ssim(cover, stego.raster) << "\n";

    const auto path = std::filesystem::temp_directory_path() / "stegret-demo.png";
    save_image(stego.raster, path);
    const SemanticRecord back = esha_extract(load_image(path), ek, sk);
    std::cout << "extracted class=" << back.class_label << " keywords=" << back.keywords.size()
              << "\n";
    std::filesystem::remove(path);
    return back == rec ? EXIT_SUCCESS : EXIT_FAILURE;
}
