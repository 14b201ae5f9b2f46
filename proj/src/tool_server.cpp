// SPDX-License-Identifier: Apache-2.0
#include "buildarena/tool_server.hpp"

#include <istream>
#include <ostream>

#include <fmt/format.h>

#include "buildarena/native_format.hpp"

namespace buildarena::io {

namespace {

using json = nlohmann::json;

json protocol_error(json id, std::string detail)
{
    return json{{"id", std::move(id)},
                {"ok", false},
                {"description", "ProtocolError: " + std::move(detail)},
                {"error", "ProtocolError"},
                {"state_delta", to_json(ActionResult{})["state_delta"]}};
}

std::string dump_line(const json& j) { return j.dump(-1, ' ', false, json::error_handler_t::replace); }

}  // namespace

ToolServer::ToolServer(std::shared_ptr<const catalog::Catalog> catalog, scene::SceneConfig config)
    : catalog_(std::move(catalog)), config_(config)
{
}

std::shared_ptr<ToolServer::Session> ToolServer::session_for(const std::string& name, bool create)
{
    std::lock_guard lock(sessions_mutex_);
    auto it = sessions_.find(name);
    if (it != sessions_.end())
        return it->second;
    if (!create)
        return nullptr;
    auto session = std::make_shared<Session>(actions::Workbench(catalog_, config_));
    sessions_.emplace(name, session);
    return session;
}

std::vector<std::string> ToolServer::session_names() const
{
    std::lock_guard lock(sessions_mutex_);
    std::vector<std::string> out;
    for (const auto& [name, s] : sessions_)
        out.push_back(name);
    return out;
}

actions::Workbench ToolServer::session(const std::string& name) const
{
    std::shared_ptr<Session> s;
    {
        std::lock_guard lock(sessions_mutex_);
        s = sessions_.at(name);
    }
    std::lock_guard lock(s->mutex);
    return s->bench;
}

std::string ToolServer::handle_line(std::string_view line)
{
    json request = json::parse(line.begin(), line.end(), nullptr, false);
    if (request.is_discarded())
        return dump_line(protocol_error(nullptr, "the line is not a JSON document"));
    if (!request.is_object())
        return dump_line(protocol_error(nullptr, "a request must be a JSON object"));
    json id = request.contains("id") ? request["id"] : json(nullptr);
    try {
        json response = dispatch(request);
        response["id"] = id;
        return dump_line(response);
    } catch (const std::exception& e) {
        return dump_line(protocol_error(id, e.what()));
    }
}

json ToolServer::dispatch(const json& request)
{
    std::string session_name = "default";
    if (request.contains("session")) {
        if (!request["session"].is_string())
            return protocol_error(nullptr, "\"session\" must be a string");
        session_name = request["session"].get<std::string>();
    }

    if (request.contains("method")) {
        if (!request["method"].is_string())
            return protocol_error(nullptr, "\"method\" must be a string");
        const std::string method = request["method"].get<std::string>();
        if (method == "list_actions") {
            json names = json::object();
            for (auto c : {ActionCategory::build, ActionCategory::refine, ActionCategory::assemble,
                           ActionCategory::control, ActionCategory::query})
                names[std::string(to_string(c))] = actions::registered_names(c);
            return {{"ok", true}, {"description", "registered actions"}, {"error", nullptr}, {"actions", names}};
        }
        if (method == "close") {
            std::lock_guard lock(sessions_mutex_);
            const bool existed = sessions_.erase(session_name) > 0;
            return {{"ok", existed},
                    {"description", existed ? "session closed" : "no such session"},
                    {"error", existed ? json(nullptr) : json("ProtocolError")}};
        }
        auto s = session_for(session_name, true);
        std::lock_guard lock(s->mutex);
        if (method == "state_hash")
            return {{"ok", true}, {"description", s->bench.scene().state_hash()}, {"error", nullptr}};
        if (method == "export")
            return {{"ok", true}, {"description", export_native(s->bench)}, {"error", nullptr}};
        if (method == "check_invariants") {
            const auto problems = s->bench.scene().check_invariants();
            return {{"ok", problems.empty()},
                    {"description", problems.empty() ? "all invariants hold" : fmt::format("{} problem(s)", problems.size())},
                    {"error", problems.empty() ? json(nullptr) : json("InvariantViolation")},
                    {"problems", problems}};
        }
        return protocol_error(nullptr, fmt::format("unknown method '{}'", method));
    }

    if (!request.contains("name") || !request["name"].is_string())
        return protocol_error(nullptr, "a request needs a string \"name\" or \"method\"");
    const std::string name = request["name"].get<std::string>();
    ActionCategory category = ActionCategory::query;
    if (request.contains("category")) {
        if (!request["category"].is_string())
            return protocol_error(nullptr, "\"category\" must be a string");
        const auto parsed = category_from_string(request["category"].get<std::string>());
        if (!parsed)
            return protocol_error(nullptr, fmt::format("unknown category '{}'", request["category"].get<std::string>()));
        category = *parsed;
    } else if (auto registered = actions::registered_category(name)) {
        category = *registered;
    }
    json arguments = request.contains("arguments") ? request["arguments"] : json::object();

    auto s = session_for(session_name, true);
    std::lock_guard lock(s->mutex);
    const ActionResult result = s->bench.apply(Action{category, name, std::move(arguments), {}});
    return to_json(result);
}

void ToolServer::serve(std::istream& in, std::ostream& out, std::ostream* transcript)
{
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r')
            line.pop_back();
        // Only truly empty lines are silent; whitespace gets a ProtocolError like any other garbage.
        if (line.empty())
            continue;
        const std::string response = handle_line(line);
        out << response << '\n' << std::flush;
        if (transcript) {
            json record{{"request", line}, {"response", response}};
            *transcript << dump_line(record) << '\n';
        }
    }
}

}  // namespace buildarena::io
