#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace treefuse {

// All failures surface as subclasses of Error. what() always starts with the
// stable class code ("DuplicateName: ..."), which is what the CLI prints on
// stderr, so diagnostics stay single-line and grep-able by class.
class Error : public std::runtime_error {
public:
    Error(std::string_view code, std::string_view message)
        : std::runtime_error(std::string(code) + ": " + std::string(message)),
          code_(code) {}

    const std::string& code() const { return code_; }

private:
    std::string code_;
};

#define TREEFUSE_DEFINE_ERROR(Name)                         \
    class Name : public Error {                             \
    public:                                                 \
        explicit Name(std::string_view message)             \
            : Error(#Name, message) {}                      \
    }

// knowledge tree
TREEFUSE_DEFINE_ERROR(DuplicateName);
TREEFUSE_DEFINE_ERROR(InvalidParent);
TREEFUSE_DEFINE_ERROR(InvalidDomain);

// bandit
TREEFUSE_DEFINE_ERROR(AllDeactivated);
TREEFUSE_DEFINE_ERROR(DeactivatedArm);
TREEFUSE_DEFINE_ERROR(LengthMismatch);
TREEFUSE_DEFINE_ERROR(NoCompleteChain);

// change detection
TREEFUSE_DEFINE_ERROR(WindowTooShort);
TREEFUSE_DEFINE_ERROR(InconsistentCounts);

// ensemble protocol
TREEFUSE_DEFINE_ERROR(OutOfRange);
TREEFUSE_DEFINE_ERROR(QuestionGenFailed);
TREEFUSE_DEFINE_ERROR(JudgeParseFailed);

// prompt/endpoint client
TREEFUSE_DEFINE_ERROR(MissingParam);
TREEFUSE_DEFINE_ERROR(MarkerNotFound);
TREEFUSE_DEFINE_ERROR(Transport);
TREEFUSE_DEFINE_ERROR(Timeout);
TREEFUSE_DEFINE_ERROR(AuthMissing);

// persistence / config
TREEFUSE_DEFINE_ERROR(Io);
TREEFUSE_DEFINE_ERROR(CorruptCheckpoint);
TREEFUSE_DEFINE_ERROR(ConfigInvalid);

#undef TREEFUSE_DEFINE_ERROR

}  // namespace treefuse
