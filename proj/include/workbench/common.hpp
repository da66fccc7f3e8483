#pragma once

#include <stdexcept>
#include <string>

namespace wb {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct DimensionMismatch : Error {
    using Error::Error;
};
struct ZeroForwardProjection : Error {
    using Error::Error;
};
struct EmptyGrid : Error {
    using Error::Error;
};
struct PixelOutsideFOV : Error {
    using Error::Error;
};
struct NegativeMean : Error {
    using Error::Error;
};
struct NegativeRate : Error {
    using Error::Error;
};
struct DisconnectedPair : Error {
    using Error::Error;
};
struct UnknownNode : Error {
    using Error::Error;
};
struct UnknownTransform : Error {
    using Error::Error;
};
struct DegenerateImage : Error {
    using Error::Error;
};
struct InfiniteMean : Error {
    using Error::Error;
};
struct QOutOfRange : Error {
    using Error::Error;
};
struct MalformedFile : Error {
    using Error::Error;
};

}  // namespace wb
