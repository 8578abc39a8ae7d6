#pragma once

#include <stdexcept>
#include <string>

namespace stegret {

// Every failure the library reports, one code per contract-level error.
// The CLI maps these onto process exit codes; see tools/stegret.cpp.
enum class Errc {
    unsupported_format,
    malformed_file,
    io_failure,
    image_too_small,
    dimension_mismatch,
    capacity_exceeded,
    odd_bit_count,
    field_too_long,
    invalid_record,
    malformed_payload,
    no_payload,
    header_corrupt,
    integrity_failure,
    parse_error,
    cycle_detected,
    duplicate_synonym,
    empty_query,
    empty_class,
    no_centroids,
};

class Error : public std::runtime_error {
public:
    Error(Errc code, const std::string& message)
        : std::runtime_error(message), code_(code) {}

    Errc code() const noexcept { return code_; }

private:
    Errc code_;
};

[[noreturn]] inline void raise(Errc code, const std::string& message) {
    throw Error(code, message);
}

inline const char* errc_name(Errc code) noexcept {
    switch (code) {
        case Errc::unsupported_format: return "unsupported format";
        case Errc::malformed_file:     return "malformed file";
        case Errc::io_failure:         return "io failure";
        case Errc::image_too_small:    return "image too small";
        case Errc::dimension_mismatch: return "dimension mismatch";
        case Errc::capacity_exceeded:  return "capacity exceeded";
        case Errc::odd_bit_count:      return "odd bit count";
        case Errc::field_too_long:     return "field too long";
        case Errc::invalid_record:     return "invalid record";
        case Errc::malformed_payload:  return "malformed payload";
        case Errc::no_payload:         return "no payload";
        case Errc::header_corrupt:     return "header corrupt";
        case Errc::integrity_failure:  return "integrity failure";
        case Errc::parse_error:        return "parse error";
        case Errc::cycle_detected:     return "cycle detected";
        case Errc::duplicate_synonym:  return "duplicate synonym";
        case Errc::empty_query:        return "empty query";
        case Errc::empty_class:        return "empty class";
        case Errc::no_centroids:       return "no centroids";
    }
    return "unknown error";
}

} // namespace stegret
