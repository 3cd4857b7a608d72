#pragma once

#include <stdexcept>
#include <string>

namespace agctl {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// fsm-core
struct InfeasibleGraph : Error { using Error::Error; };
struct GenerationStalled : Error { using Error::Error; };
struct UnknownState : Error { using Error::Error; };
struct NoReachablePair : Error { using Error::Error; };

// thermal-twin
struct NonFiniteState : Error { using Error::Error; };
struct BracketFailure : Error { using Error::Error; };
struct OutOfRange : Error { using Error::Error; };

// agent-pipeline
struct UnboundPlaceholder : Error {
    explicit UnboundPlaceholder(const std::string& key)
        : Error("unbound placeholder: " + key), placeholder(key) {}
    std::string placeholder;
};
struct ParseFailure : Error {
    ParseFailure(const std::string& msg, std::string raw)
        : Error(msg), raw_text(std::move(raw)) {}
    std::string raw_text;  // preserved for the audit log
};

// llm-provider
struct ProviderError : Error { using Error::Error; };
struct Timeout : ProviderError { using ProviderError::ProviderError; };
struct TransportError : ProviderError { using ProviderError::ProviderError; };
struct MalformedResponse : ProviderError { using ProviderError::ProviderError; };
struct ScriptExhausted : ProviderError { using ProviderError::ProviderError; };

// bench-metrics
struct EmptyCell : Error { using Error::Error; };
struct EmptyInput : Error { using Error::Error; };
struct TooFewSamples : Error { using Error::Error; };

}  // namespace agctl
