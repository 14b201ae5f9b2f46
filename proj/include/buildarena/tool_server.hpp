// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <iosfwd>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "buildarena/actions.hpp"

namespace buildarena::io {

/// Line-delimited JSON tool protocol.
///
/// Request: {"id": any, "session": "name", "category": "build", "name": "attach_block_to",
/// "arguments": {...}}. `category` may be omitted for registered names and `session` defaults
/// to "default". Server methods use "method": "state_hash" | "export" | "check_invariants" |
/// "close" | "list_actions" instead of a name.
///
/// Response: {"id": same, "ok": bool, "description": text, "error": code or null,
/// "state_delta": {...}}. Lines that cannot be understood get error "ProtocolError" and,
/// when no id could be read, id null.
class ToolServer {
public:
    explicit ToolServer(std::shared_ptr<const catalog::Catalog> catalog, scene::SceneConfig config = {});

    /// Safe to call from several threads; requests for one session are serialized.
    std::string handle_line(std::string_view line);

    /// Reads requests until end of stream and writes one response line per non-blank request.
    /// Each request and response is also appended to `transcript` when given.
    void serve(std::istream& in, std::ostream& out, std::ostream* transcript = nullptr);

    std::vector<std::string> session_names() const;
    /// Copy of a session's workbench; throws std::out_of_range for unknown sessions.
    actions::Workbench session(const std::string& name) const;

private:
    struct Session {
        std::mutex mutex;
        actions::Workbench bench;
        explicit Session(actions::Workbench b) : bench(std::move(b)) {}
    };

    std::shared_ptr<Session> session_for(const std::string& name, bool create);
    nlohmann::json dispatch(const nlohmann::json& request);

    std::shared_ptr<const catalog::Catalog> catalog_;
    scene::SceneConfig config_;
    mutable std::mutex sessions_mutex_;
    std::map<std::string, std::shared_ptr<Session>> sessions_;
};

}  // namespace buildarena::io
