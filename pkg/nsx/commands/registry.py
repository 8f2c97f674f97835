class CommandGroup:
    """A set of CLI commands registered on the application together."""

    def __init__(self, name):
        self.name = name
        self.handlers = {}

    def command(self, name):
        def decorator(func):
            self.handlers[name] = func
            return func
        return decorator


class CommandRegistry:
    def __init__(self):
        self.handlers = {}

    def register_group(self, group):
        for name, handler in group.handlers.items():
            if name in self.handlers:
                raise KeyError(f'command {name} registered twice')
            self.handlers[name] = handler

    @property
    def names(self):
        return sorted(self.handlers)

    def get(self, name):
        return self.handlers.get(name)
