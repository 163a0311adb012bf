"""HTTP front end; the CLI talks to it in-process or over the network."""
