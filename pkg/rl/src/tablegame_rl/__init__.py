"""TD3-with-demonstrations harness for the table game, speaking only the
environment's wire protocol and demonstration files."""

from .bc import BCModel, train_bc
from .buffers import DemoBuffer, ReplayBuffer, load_demo_transitions
from .env_client import EnvClient, ProtocolError
from .evaluate import evaluate, run_episode
from .nets import Actor, Critic, default_blocks, normalize_state
from .td3 import AgentConfig, TD3Agent

__version__ = "0.1.0"
