#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace dialam {

enum class ErrorCode {
    // graph
    MalformedDocument,
    UnknownNodeKind,
    DuplicateNodeId,
    DanglingEdgeEndpoint,
    InvalidStructure,
    NotATaNode,
    NotAnSNode,
    // dataset
    KindMismatch,
    UnknownYaLabel,
    UnknownEvalId,
    BadFraction,
    DuplicateId,
    // classifier
    DegenerateData,
    NonFiniteLoss,
    IoFailure,
    VersionMismatch,
    CorruptModel,
    Transport,
    ProtocolViolation,
    BackendError,
    // pipeline
    BackendFailure,
    UnknownReference,
    BadConfig,
    // scorer
    NodeMismatch,
    MissingPrediction,
    ParseFailure,
};

constexpr std::string_view to_string(ErrorCode c) noexcept
{
    switch (c) {
    case ErrorCode::MalformedDocument: return "MalformedDocument";
    case ErrorCode::UnknownNodeKind: return "UnknownNodeKind";
    case ErrorCode::DuplicateNodeId: return "DuplicateNodeId";
    case ErrorCode::DanglingEdgeEndpoint: return "DanglingEdgeEndpoint";
    case ErrorCode::InvalidStructure: return "InvalidStructure";
    case ErrorCode::NotATaNode: return "NotATaNode";
    case ErrorCode::NotAnSNode: return "NotAnSNode";
    case ErrorCode::KindMismatch: return "KindMismatch";
    case ErrorCode::UnknownYaLabel: return "UnknownYaLabel";
    case ErrorCode::UnknownEvalId: return "UnknownEvalId";
    case ErrorCode::BadFraction: return "BadFraction";
    case ErrorCode::DuplicateId: return "DuplicateId";
    case ErrorCode::DegenerateData: return "DegenerateData";
    case ErrorCode::NonFiniteLoss: return "NonFiniteLoss";
    case ErrorCode::IoFailure: return "IoFailure";
    case ErrorCode::VersionMismatch: return "VersionMismatch";
    case ErrorCode::CorruptModel: return "CorruptModel";
    case ErrorCode::Transport: return "Transport";
    case ErrorCode::ProtocolViolation: return "ProtocolViolation";
    case ErrorCode::BackendError: return "BackendError";
    case ErrorCode::BackendFailure: return "BackendFailure";
    case ErrorCode::UnknownReference: return "UnknownReference";
    case ErrorCode::BadConfig: return "BadConfig";
    case ErrorCode::NodeMismatch: return "NodeMismatch";
    case ErrorCode::MissingPrediction: return "MissingPrediction";
    case ErrorCode::ParseFailure: return "ParseFailure";
    }
    return "Unknown";
}

/// Domain error. `subject()` names the offending node, edge, file or label
/// when there is one.
class Error : public std::runtime_error
{
public:
    Error(ErrorCode code, std::string subject, const std::string& message)
        : std::runtime_error(std::string(to_string(code)) + (subject.empty() ? "" : "(" + subject + ")")
                             + (message.empty() ? "" : ": " + message))
        , m_code(code)
        , m_subject(std::move(subject))
    {}

    ErrorCode code() const noexcept { return m_code; }
    const std::string& subject() const noexcept { return m_subject; }

private:
    ErrorCode m_code;
    std::string m_subject;
};

} // namespace dialam
