#ifndef CERTJULIA_ERROR_HPP
#define CERTJULIA_ERROR_HPP

#include <stdexcept>
#include <string>

namespace certjulia {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class ParseError : public Error {
public:
    using Error::Error;
};

// A denominator ball contained zero; either work_bits is too small or the
// point sits on a pole.
class DenominatorVanishes : public Error {
public:
    DenominatorVanishes() : Error("denominator ball contains zero") {}
    using Error::Error;
};

// Orbit evaluation could not meet its target width within the retry cap.
// Under a consistent certificate this does not happen.
class PrecisionExhausted : public Error {
public:
    using Error::Error;
};

class PointInsideCover : public Error {
public:
    PointInsideCover() : Error("point lies inside the cover") {}
};

class RootFindingFailure : public Error {
public:
    using Error::Error;
};

class InvalidConstants : public Error {
public:
    using Error::Error;
};

class InsufficientSamples : public Error {
public:
    using Error::Error;
};

class CertificateInvalid : public Error {
public:
    using Error::Error;
};

} // namespace certjulia

#endif
