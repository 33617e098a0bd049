"""ragforge - metadata enrichment and retrieval evaluation for RAG pipelines"""
__version__ = "0.1.0"
