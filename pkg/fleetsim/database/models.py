"""Database models"""

from datetime import datetime

from sqlalchemy import JSON, Column, DateTime, Float, Integer, String, Text

from fleetsim.database.database import Base


class SimulationRun(Base):
    """One recorded simulation run"""

    __tablename__ = "simulation_runs"

    id = Column(Integer, primary_key=True, index=True)
    scenario = Column(String(255), nullable=False, index=True)
    controller = Column(String(16), nullable=False)
    seed = Column(Integer, nullable=False)
    dt = Column(Float, nullable=False)
    horizon = Column(Float, nullable=False)
    verdict = Column(String(16), nullable=False)  # completed, diverged
    reason = Column(Text, nullable=True)
    final_time = Column(Float, nullable=False)
    metrics = Column(JSON, nullable=True)  # Metrics.to_dict()
    trace_path = Column(String(1024), nullable=True)
    duration_ms = Column(Integer, nullable=True)
    created_at = Column(DateTime, default=datetime.utcnow)
