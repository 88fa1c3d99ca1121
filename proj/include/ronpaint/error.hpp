#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace ronpaint {

/// Bad user input: malformed files, unsupported notation, inconsistent data.
class InputError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Syntax error in a SMILES string or substructure pattern. Carries the byte
/// offset of the offending character.
class ParseError : public InputError {
public:
    ParseError(const std::string& what, std::string text, std::size_t offset)
        : InputError(what + " at offset " + std::to_string(offset) + " in '" + text + "'"),
          text_(std::move(text)),
          offset_(offset) {}

    const std::string& text() const noexcept { return text_; }
    std::size_t offset() const noexcept { return offset_; }

private:
    std::string text_;
    std::size_t offset_;
};

/// An internal consistency check failed. Indicates a bug, not bad input.
class InvariantError : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

}  // namespace ronpaint
